#include "helpers.hpp"

#include "mrcsplit/corpus.hpp"
#include "mrcsplit/stopwords.hpp"
#include "mrcsplit/textproc.hpp"

using namespace mrcsplit;

namespace {

std::vector<std::string> surfaces(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(text)) out.push_back(t.surface);
  return out;
}

const char* kFigureContext =
    "In November 2014, Sony Pictures Entertainment was targeted by hackers who released details "
    "of confidential e-mails between Sony executives regarding [...]. Included within these were "
    "several memos relating to the production [...]. Eon Productions later issued a statement "
    "[...].";

// Random text over a small alphabet that exercises punctuation and UTF-8.
std::string random_text(std::mt19937& rng, std::size_t pieces) {
  static const std::vector<std::string> parts{
      "a", "Mr.", "U.S.", "B", "the", "run", ",", ".", "?", "!", "\"", "(", ")", " ", " ", "  ",
      "\n", "\t", "é", "Ünïcode", "—", "2014", "e-mail", "'s", "“quoted”", "etc.", "x"};
  std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
  std::string s;
  for (std::size_t i = 0; i < pieces; ++i) s += parts[pick(rng)];
  return s;
}

}  // namespace

TEST_CASE("stopword file ships identical to the embedded list") {
  const std::string file = testing::slurp(MRCSPLIT_SOURCE_DIR "/data/stopwords.txt");
  CHECK(file == kDefaultStopwordFile);
  const auto& builtin = StopwordList::builtin();
  CHECK(builtin.size() == 127);
  CHECK(builtin.hash() == "46473cd8d59f3640");
  CHECK(builtin.hash() == fnv1a_hex(file));
  CHECK(builtin.contains("the"));
  CHECK(builtin.contains("when"));
  CHECK_FALSE(builtin.contains("hackers"));
}

TEST_CASE("custom stopword lists ignore comments and blanks") {
  const auto list = StopwordList::parse("# header\nfoo\n\n  bar  # trailing\r\n");
  CHECK(list.size() == 2);
  CHECK(list.contains("foo"));
  CHECK(list.contains("bar"));
  CHECK(list.hash() != StopwordList::builtin().hash());
}

TEST_CASE("tokenize splits whitespace and edge punctuation") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \n\t").empty());
  CHECK(surfaces("In November 2014, Sony") ==
        std::vector<std::string>{"In", "November", "2014", ",", "Sony"});
  CHECK(surfaces("(quoted)?") == std::vector<std::string>{"(", "quoted", ")", "?"});
  // inner punctuation stays attached
  CHECK(surfaces("e-mail U.S") == std::vector<std::string>{"e-mail", "U.S"});
  const auto toks = tokenize("In November");
  REQUIRE(toks.size() == 2);
  CHECK(toks[1].start == 3);
  CHECK(toks[1].end == 11);
}

TEST_CASE("token offsets reconstruct the source bytes") {
  std::mt19937 rng(7);
  for (int round = 0; round < 500; ++round) {
    const std::string text = random_text(rng, 1 + round % 40);
    const auto toks = tokenize(text);
    std::size_t pos = 0;
    std::string rebuilt;
    for (const auto& t : toks) {
      REQUIRE(t.start >= pos);
      REQUIRE(t.start < t.end);
      REQUIRE(t.end <= text.size());
      CHECK(text.substr(t.start, t.end - t.start) == t.surface);
      rebuilt += text.substr(pos, t.start - pos);
      rebuilt += t.surface;
      pos = t.end;
    }
    rebuilt += text.substr(pos);
    CHECK(rebuilt == text);
    CHECK(tokenize(text) == toks);
  }
}

TEST_CASE("sentence segmentation") {
  CHECK(segment_sentences("A. B? C!").size() == 3);
  CHECK(segment_sentences("no terminator here").size() == 1);
  CHECK(segment_sentences("").empty());

  const auto fig = segment_sentences(kFigureContext);
  REQUIRE(fig.size() == 3);
  CHECK(std::string_view(kFigureContext).substr(fig[1].start, 8) == "Included");

  SECTION("abbreviations do not end sentences") {
    CHECK(segment_sentences("Mr. Smith went to the U.S. Army base. He left.").size() == 2);
    CHECK(segment_sentences("Apples, pears, etc. Are fruit.").size() == 1);
  }
  SECTION("terminator must be followed by a capital or a quote") {
    CHECK(segment_sentences("version 2.0 is out. it ships today.").size() == 1);
    CHECK(segment_sentences("He said no. \"Fine,\" she said.").size() == 2);
  }
}

TEST_CASE("sentences tile the token stream") {
  std::mt19937 rng(11);
  for (int round = 0; round < 500; ++round) {
    const std::string text = random_text(rng, 1 + round % 60);
    const auto toks = tokenize(text);
    const auto sents = segment_sentences(text);
    if (toks.empty()) {
      CHECK(sents.empty());
      continue;
    }
    REQUIRE_FALSE(sents.empty());
    std::size_t next = 0;
    for (std::size_t i = 0; i < sents.size(); ++i) {
      CHECK(sents[i].index == i);
      CHECK(sents[i].token_begin == next);
      REQUIRE(sents[i].token_end > sents[i].token_begin);
      CHECK(sents[i].tokens.size() == sents[i].token_end - sents[i].token_begin);
      CHECK(sents[i].tokens.front() == toks[sents[i].token_begin]);
      CHECK(sents[i].start == sents[i].tokens.front().start);
      CHECK(sents[i].end == sents[i].tokens.back().end);
      next = sents[i].token_end;
    }
    CHECK(next == toks.size());
    CHECK(segment_sentences(text) == sents);
  }
}

TEST_CASE("normalize_answer") {
  CHECK(normalize_answer("The November 2014") == "november 2014");
  CHECK(normalize_answer("") == "");
  CHECK(normalize_answer("a an the") == "");
  CHECK(normalize_answer("  Theater,  the   END! ") == "theater end");
  CHECK(normalize_answer("Yes") == normalize_answer("yes"));

  std::mt19937 rng(3);
  for (int round = 0; round < 300; ++round) {
    const std::string text = random_text(rng, round % 30);
    const std::string once = normalize_answer(text);
    CHECK(normalize_answer(once) == once);
  }
}

TEST_CASE("content_terms") {
  auto bag = [](std::string_view s) {
    const auto t = tokenize(s);
    return content_terms(t);
  };
  const auto hackers = bag("the hackers");
  CHECK(hackers.size() == 1);
  CHECK(hackers.count("hacker") == 1);
  CHECK(bag("the a of and").empty());
  const auto running = bag("running runs");
  CHECK(running.size() == 2);
  CHECK(running.count("run") == 2);
  CHECK(bag("Sony , ?").count("soni") == 1);

  SECTION("monotone under concatenation") {
    std::mt19937 rng(5);
    for (int round = 0; round < 200; ++round) {
      const std::string x = random_text(rng, round % 20);
      const std::string y = random_text(rng, round % 13);
      const auto bx = bag(x);
      // whitespace between keeps the tokens of x intact
      const auto bxy = bag(x + " " + y);
      for (const auto& [term, n] : bx.counts()) CHECK(bxy.count(term) >= n);
      for (const auto& [term, n] : bx.counts()) CHECK_FALSE(StopwordList::builtin().contains(term));
    }
  }
}

TEST_CASE("numbered references stay in one sentence") {
  CHECK(segment_sentences("It reached No. 5 on the chart. Then it fell.").size() == 2);
}
