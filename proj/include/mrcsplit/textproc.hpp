#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrcsplit/porter.hpp"
#include "mrcsplit/stopwords.hpp"
#include "mrcsplit/unicode.hpp"

namespace mrcsplit {

struct Token {
  std::string surface;
  std::size_t start = 0;  // byte offset into the source text
  std::size_t end = 0;    // exclusive

  bool operator==(const Token&) const = default;
};

struct SentenceSpan {
  std::size_t index = 0;
  std::size_t start = 0;  // byte offsets
  std::size_t end = 0;
  std::size_t token_begin = 0;  // index range into the tokenized source
  std::size_t token_end = 0;
  std::vector<Token> tokens;

  bool operator==(const SentenceSpan&) const = default;
};

/// Multiset of stemmed, lowercased, stopword-free terms.
class ContentTermBag {
 public:
  void add(std::string term, std::size_t n = 1) {
    counts_[std::move(term)] += n;
    total_ += n;
  }
  std::size_t count(const std::string& term) const {
    auto it = counts_.find(term);
    return it == counts_.end() ? 0 : it->second;
  }
  std::size_t size() const { return total_; }
  bool empty() const { return total_ == 0; }
  const std::map<std::string, std::size_t>& counts() const { return counts_; }

  bool operator==(const ContentTermBag&) const = default;

 private:
  std::map<std::string, std::size_t> counts_;
  std::size_t total_ = 0;
};

namespace textproc_detail {

struct CodepointAt {
  char32_t cp;
  std::size_t start;
  std::size_t end;
};

inline void split_word(std::string_view text, std::size_t ws, std::size_t we,
                       std::vector<Token>& out) {
  std::vector<CodepointAt> cps;
  for (std::size_t i = ws; i < we;) {
    auto d = utf8::decode(text, i);
    cps.push_back({d.cp, i, i + d.length});
    i += d.length;
  }
  std::size_t lead = 0;
  while (lead < cps.size() && utf8::is_punctuation(cps[lead].cp)) ++lead;
  std::size_t trail = cps.size();
  while (trail > lead && utf8::is_punctuation(cps[trail - 1].cp)) --trail;

  auto emit = [&](std::size_t s, std::size_t e) {
    out.push_back(Token{std::string(text.substr(s, e - s)), s, e});
  };
  for (std::size_t i = 0; i < lead; ++i) emit(cps[i].start, cps[i].end);
  if (trail > lead) emit(cps[lead].start, cps[trail - 1].end);
  for (std::size_t i = trail; i < cps.size(); ++i)
    if (i >= lead) emit(cps[i].start, cps[i].end);
}

inline bool is_punct_token(std::string_view s) {
  if (s.empty()) return false;
  for (std::size_t i = 0; i < s.size();) {
    auto d = utf8::decode(s, i);
    if (!utf8::is_punctuation(d.cp)) return false;
    i += d.length;
  }
  return true;
}

inline bool is_terminator(const Token& t) {
  return t.surface == "." || t.surface == "?" || t.surface == "!";
}

inline bool is_closer(const Token& t) {
  static constexpr std::array<std::string_view, 9> kClosers{
      "\"", "'", ")", "]", "}", "”", "’", "»", "›"};
  return std::find(kClosers.begin(), kClosers.end(), t.surface) != kClosers.end();
}

inline bool opens_sentence(const Token& t) {
  auto d = utf8::decode(t.surface, 0);
  if (utf8::is_upper(d.cp)) return true;
  switch (d.cp) {
    case U'"': case U'\'': case U'“': case U'‘': case U'«': case U'‹':
      return true;
    default:
      return false;
  }
}

inline bool is_abbreviation(std::string_view surface) {
  static constexpr std::array<std::string_view, 51> kAbbreviations{
      "mr",   "mrs",  "ms",    "dr",   "prof", "sr",   "jr",   "st",   "mt",   "vs",  "etc",
      "e.g",  "i.e",  "u.s",   "u.k",  "u.n",  "inc",  "ltd",  "co",   "corp", "jan", "feb",
      "mar",  "apr",  "jun",   "jul",  "aug",  "sep",  "sept", "oct",  "nov",  "dec",
      "fig",  "gen",  "gov",   "sen",  "rep",  "rev",  "lt",   "col",  "capt", "sgt", "ave",
      "dept", "est",  "vol",   "pp",   "ca",   "al",   "cf",   "approx"};
  const std::string lower = utf8::lowercase(surface);
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end())
    return true;
  // Dotted initialisms such as "U.S.A" or "p.m".
  if (lower.find('.') == std::string::npos) return false;
  bool expect_letter = true;
  for (char c : lower) {
    const bool letter = c >= 'a' && c <= 'z';
    if (expect_letter != letter) return false;
    expect_letter = !expect_letter;
  }
  return !expect_letter;
}

}  // namespace textproc_detail

/// Whitespace split, then each leading/trailing punctuation code point becomes
/// its own token.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto d = utf8::decode(text, i);
    if (utf8::is_whitespace(d.cp)) {
      i += d.length;
      continue;
    }
    std::size_t we = i;
    while (we < text.size()) {
      auto e = utf8::decode(text, we);
      if (utf8::is_whitespace(e.cp)) break;
      we += e.length;
    }
    textproc_detail::split_word(text, i, we, out);
    i = we;
  }
  return out;
}

/// Rule-based split after '.', '?' or '!' (plus any attached closing quotes or
/// brackets) when whitespace and a capital letter or opening quote follow.
/// A period after a known abbreviation never ends a sentence.
inline std::vector<SentenceSpan> segment_sentences(std::string_view text) {
  using namespace textproc_detail;
  const std::vector<Token> tokens = tokenize(text);
  std::vector<SentenceSpan> out;
  std::size_t begin = 0;

  auto close = [&](std::size_t end_tok) {
    SentenceSpan s;
    s.index = out.size();
    s.token_begin = begin;
    s.token_end = end_tok;
    s.start = tokens[begin].start;
    s.end = tokens[end_tok - 1].end;
    s.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                    tokens.begin() + static_cast<std::ptrdiff_t>(end_tok));
    out.push_back(std::move(s));
    begin = end_tok;
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!is_terminator(tokens[i])) {
      ++i;
      continue;
    }
    if (tokens[i].surface == "." && i > begin && tokens[i - 1].end == tokens[i].start &&
        is_abbreviation(tokens[i - 1].surface)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tokens.size() && tokens[j].start == tokens[j - 1].end &&
           (is_terminator(tokens[j]) || is_closer(tokens[j])))
      ++j;
    if (j < tokens.size() && tokens[j].start > tokens[j - 1].end && opens_sentence(tokens[j]))
      close(j);
    i = j;
  }
  if (begin < tokens.size()) close(tokens.size());
  return out;
}

/// Answer normalization with the semantics of the SQuAD v1.1 evaluation
/// script: lowercase, strip punctuation, drop articles, collapse whitespace.
inline std::string normalize_answer(std::string_view text) {
  const std::string lower = utf8::lowercase(text);
  std::string no_punct;
  no_punct.reserve(lower.size());
  for (std::size_t i = 0; i < lower.size();) {
    auto d = utf8::decode(lower, i);
    if (!utf8::is_punctuation(d.cp)) no_punct.append(lower, i, d.length);
    i += d.length;
  }
  std::string out;
  std::size_t i = 0;
  while (i < no_punct.size()) {
    auto d = utf8::decode(no_punct, i);
    if (utf8::is_whitespace(d.cp)) {
      i += d.length;
      continue;
    }
    std::size_t we = i;
    while (we < no_punct.size()) {
      auto e = utf8::decode(no_punct, we);
      if (utf8::is_whitespace(e.cp)) break;
      we += e.length;
    }
    std::string_view word(no_punct.data() + i, we - i);
    if (word != "a" && word != "an" && word != "the") {
      if (!out.empty()) out.push_back(' ');
      out.append(word);
    }
    i = we;
  }
  return out;
}

inline std::vector<std::string> normalized_tokens(std::string_view text) {
  std::vector<std::string> out;
  const std::string norm = normalize_answer(text);
  std::size_t pos = 0;
  while (pos < norm.size()) {
    std::size_t sp = norm.find(' ', pos);
    if (sp == std::string::npos) sp = norm.size();
    out.emplace_back(norm.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return out;
}

/// Lowercase, drop stopwords and punctuation-only tokens, Porter-stem. A stem
/// that lands on a stopword ("belows" -> "below") is dropped as well.
inline ContentTermBag content_terms(std::span<const Token> tokens,
                                    const StopwordList& stopwords = StopwordList::builtin()) {
  ContentTermBag bag;
  for (const auto& t : tokens) {
    if (textproc_detail::is_punct_token(t.surface)) continue;
    std::string lower = utf8::lowercase(t.surface);
    if (stopwords.contains(lower)) continue;
    std::string stem = porter_stem(lower);
    if (stopwords.contains(stem)) continue;
    bag.add(std::move(stem));
  }
  return bag;
}

}  // namespace mrcsplit
