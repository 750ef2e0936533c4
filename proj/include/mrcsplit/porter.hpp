#pragma once

// Porter suffix-stripping stemmer, original 1980 rule set (no later
// departures such as "bli"->"ble" or "logi"->"log"). Works on code points so
// non-ASCII letters count as single consonants.

#include <string>
#include <string_view>

#include "mrcsplit/unicode.hpp"

namespace mrcsplit {

namespace porter_detail {

using Word = std::u32string;

inline bool is_consonant(const Word& w, std::size_t i) {
  switch (w[i]) {
    case U'a': case U'e': case U'i': case U'o': case U'u':
      return false;
    case U'y':
      return i == 0 ? true : !is_consonant(w, i - 1);
    default:
      return true;
  }
}

// m in [C](VC){m}[V], evaluated on the first `len` characters.
inline int measure(const Word& w, std::size_t len) {
  int m = 0;
  std::size_t i = 0;
  while (i < len && is_consonant(w, i)) ++i;
  while (i < len) {
    while (i < len && !is_consonant(w, i)) ++i;
    if (i >= len) break;
    while (i < len && is_consonant(w, i)) ++i;
    ++m;
  }
  return m;
}

inline bool has_vowel(const Word& w, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i)
    if (!is_consonant(w, i)) return true;
  return false;
}

inline bool ends_double_consonant(const Word& w, std::size_t len) {
  return len >= 2 && w[len - 1] == w[len - 2] && is_consonant(w, len - 1);
}

// *o: stem ends cvc where the final c is not w, x or y.
inline bool ends_cvc(const Word& w, std::size_t len) {
  if (len < 3) return false;
  if (!is_consonant(w, len - 3) || is_consonant(w, len - 2) || !is_consonant(w, len - 1))
    return false;
  const char32_t last = w[len - 1];
  return last != U'w' && last != U'x' && last != U'y';
}

inline bool ends_with(const Word& w, std::u32string_view suffix) {
  return w.size() >= suffix.size() &&
         std::u32string_view(w).substr(w.size() - suffix.size()) == suffix;
}

inline void replace_suffix(Word& w, std::size_t suffix_len, std::u32string_view repl) {
  w.resize(w.size() - suffix_len);
  w.append(repl);
}

struct Rule {
  std::u32string_view suffix;
  std::u32string_view replacement;
};

// The first rule whose suffix matches decides; if its condition fails the
// word is left alone for this step.
template <std::size_t N, typename Cond>
void apply_rules(Word& w, const Rule (&rules)[N], Cond cond) {
  for (const auto& r : rules) {
    if (ends_with(w, r.suffix)) {
      const std::size_t stem_len = w.size() - r.suffix.size();
      if (cond(w, stem_len)) replace_suffix(w, r.suffix.size(), r.replacement);
      return;
    }
  }
}

inline void step1a(Word& w) {
  if (ends_with(w, U"sses")) replace_suffix(w, 4, U"ss");
  else if (ends_with(w, U"ies")) replace_suffix(w, 3, U"i");
  else if (ends_with(w, U"ss")) return;
  else if (ends_with(w, U"s")) replace_suffix(w, 1, U"");
}

inline void step1b(Word& w) {
  if (ends_with(w, U"eed")) {
    if (measure(w, w.size() - 3) > 0) replace_suffix(w, 3, U"ee");
    return;
  }
  std::size_t cut = 0;
  if (ends_with(w, U"ed") && has_vowel(w, w.size() - 2)) cut = 2;
  else if (ends_with(w, U"ing") && has_vowel(w, w.size() - 3)) cut = 3;
  if (cut == 0) return;
  w.resize(w.size() - cut);

  if (ends_with(w, U"at")) replace_suffix(w, 2, U"ate");
  else if (ends_with(w, U"bl")) replace_suffix(w, 2, U"ble");
  else if (ends_with(w, U"iz")) replace_suffix(w, 2, U"ize");
  else if (ends_double_consonant(w, w.size())) {
    const char32_t last = w.back();
    if (last != U'l' && last != U's' && last != U'z') w.pop_back();
  } else if (measure(w, w.size()) == 1 && ends_cvc(w, w.size())) {
    w.push_back(U'e');
  }
}

inline void step1c(Word& w) {
  if (ends_with(w, U"y") && has_vowel(w, w.size() - 1)) w.back() = U'i';
}

inline bool positive_measure(const Word& w, std::size_t len) { return measure(w, len) > 0; }
inline bool measure_gt1(const Word& w, std::size_t len) { return measure(w, len) > 1; }

inline void step2(Word& w) {
  static constexpr Rule rules[] = {
      {U"ational", U"ate"}, {U"tional", U"tion"}, {U"enci", U"ence"},   {U"anci", U"ance"},
      {U"izer", U"ize"},    {U"abli", U"able"},   {U"alli", U"al"},     {U"entli", U"ent"},
      {U"eli", U"e"},       {U"ousli", U"ous"},   {U"ization", U"ize"}, {U"ation", U"ate"},
      {U"ator", U"ate"},    {U"alism", U"al"},    {U"iveness", U"ive"}, {U"fulness", U"ful"},
      {U"ousness", U"ous"}, {U"aliti", U"al"},    {U"iviti", U"ive"},   {U"biliti", U"ble"},
  };
  apply_rules(w, rules, positive_measure);
}

inline void step3(Word& w) {
  static constexpr Rule rules[] = {
      {U"icate", U"ic"}, {U"ative", U""}, {U"alize", U"al"}, {U"iciti", U"ic"},
      {U"ical", U"ic"},  {U"ful", U""},   {U"ness", U""},
  };
  apply_rules(w, rules, positive_measure);
}

inline void step4(Word& w) {
  static constexpr Rule rules[] = {
      {U"al", U""},   {U"ance", U""}, {U"ence", U""}, {U"er", U""},    {U"ic", U""},
      {U"able", U""}, {U"ible", U""}, {U"ant", U""},  {U"ement", U""}, {U"ment", U""},
      {U"ent", U""},  {U"ion", U""},  {U"ou", U""},   {U"ism", U""},   {U"ate", U""},
      {U"iti", U""},  {U"ous", U""},  {U"ive", U""},  {U"ize", U""},
  };
  apply_rules(w, rules, [](const Word& word, std::size_t len) {
    if (!measure_gt1(word, len)) return false;
    if (ends_with(word, U"ion")) return len > 0 && (word[len - 1] == U's' || word[len - 1] == U't');
    return true;
  });
}

inline void step5a(Word& w) {
  if (!ends_with(w, U"e")) return;
  const std::size_t len = w.size() - 1;
  const int m = measure(w, len);
  if (m > 1 || (m == 1 && !ends_cvc(w, len))) w.pop_back();
}

inline void step5b(Word& w) {
  if (ends_with(w, U"ll") && measure(w, w.size() - 1) > 1) w.pop_back();
}

}  // namespace porter_detail

/// Stems an already-lowercased word.
inline std::string porter_stem(std::string_view word) {
  using namespace porter_detail;
  Word w;
  for (std::size_t i = 0; i < word.size();) {
    auto d = utf8::decode(word, i);
    w.push_back(d.cp);
    i += d.length;
  }
  if (w.empty()) return {};
  step1a(w);
  step1b(w);
  step1c(w);
  step2(w);
  step3(w);
  step4(w);
  step5a(w);
  step5b(w);
  std::string out;
  for (char32_t c : w) utf8::append(out, c);
  return out;
}

}  // namespace mrcsplit
