#include "helpers.hpp"

#include <functional>

#include "mrcsplit/io.hpp"
#include "mrcsplit/metrics.hpp"

using namespace mrcsplit;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<std::string> golds(std::initializer_list<const char*> g) { return {g.begin(), g.end()}; }

// Plain recursive LCS with a memo table, kept separate from the library DP.
std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<int>> memo(a.size() + 1, std::vector<int>(b.size() + 1, -1));
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    if (memo[i][j] >= 0) return static_cast<std::size_t>(memo[i][j]);
    std::size_t r = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    memo[i][j] = static_cast<int>(r);
    return r;
  };
  return go(0, 0);
}

std::vector<std::string> random_tokens(std::mt19937& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> sym(0, 4);
  std::vector<std::string> v(len(rng));
  for (auto& t : v) t = std::string(1, static_cast<char>('a' + sym(rng)));
  return v;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& t : v) s += (s.empty() ? "" : " ") + t;
  return s;
}

}  // namespace

TEST_CASE("exact match") {
  CHECK(exact_match("November 2014", golds({"November 2014"})).value == 1.0);
  CHECK(exact_match("The November 2014", golds({"november 2014"})).value == 1.0);
  CHECK(exact_match("December 2014", golds({"November 2014"})).value == 0.0);
  CHECK(exact_match("x", golds({"y", "X."})).value == 1.0);
  CHECK(testing::error_kind([] { exact_match("x", std::vector<std::string>{}); }) ==
        ErrorKind::EmptyGolds);
}

TEST_CASE("token F1") {
  CHECK(token_f1("November 2014", golds({"November 2014"})).value == 1.0);
  CHECK_THAT(token_f1("late November 2014", golds({"November 2014"})).value, WithinAbs(0.8, 1e-12));
  CHECK(token_f1("", golds({"x"})).value == 0.0);
  CHECK(token_f1("the", golds({"a"})).value == 1.0);  // both bags empty after normalization
  CHECK(token_f1("x", golds({"the"})).value == 0.0);
  // max over golds
  CHECK(token_f1("red car", golds({"blue", "red car"})).value == 1.0);
  // repeated tokens count once per occurrence
  CHECK_THAT(token_f1("x b b", golds({"b"})).value, WithinAbs(0.5, 1e-12));
}

TEST_CASE("Rouge-L") {
  CHECK(rouge_l("a b c d e", "a b c d e").value == 1.0);
  const double expected = (1 + 1.44) * (2.0 / 3.0) / (1 + 1.44 * 2.0 / 3.0);
  CHECK_THAT(rouge_l("a b c", "a c").value, WithinAbs(expected, 1e-12));
  CHECK_THAT(rouge_l("a b c", "a c").value, WithinAbs(122.0 / 147.0, 1e-12));
  CHECK(rouge_l("p q", "r s").value == 0.0);
  CHECK(rouge_l("", "").value == 1.0);
  CHECK(rouge_l("", "a").value == 0.0);
  CHECK(rouge_l("a", "").value == 0.0);
  // lowercased, but not normalized
  CHECK(rouge_l("The Cat", "the cat").value == 1.0);
  CHECK(rouge_l("the cat", "cat").value < 1.0);
  // beta = 1 is the harmonic mean
  CHECK_THAT(rouge_l("a b c", "a c", 1.0).value, WithinAbs(0.8, 1e-12));
  CHECK(testing::error_kind([] { rouge_l("a", "a", 0.0); }) == ErrorKind::SchemaViolation);
}

TEST_CASE("Rouge-L agrees with an independent LCS") {
  std::mt19937 rng(2019);
  for (int round = 0; round < 2000; ++round) {
    const auto a = random_tokens(rng, 20), b = random_tokens(rng, 20);
    const std::size_t l = oracle_lcs(a, b);
    REQUIRE(lcs_length(a, b) == l);
    double want;
    if (a.empty() && b.empty()) want = 1.0;
    else if (l == 0) want = 0.0;
    else {
      const double p = double(l) / double(a.size()), r = double(l) / double(b.size());
      want = 2.44 * p * r / (r + 1.44 * p);
    }
    CHECK(rouge_l(join(a), join(b)).value == want);
  }
}

TEST_CASE("metric properties") {
  std::mt19937 rng(42);
  for (int round = 0; round < 1000; ++round) {
    const std::string a = join(random_tokens(rng, 8)), b = join(random_tokens(rng, 8));
    const double f_ab = token_f1(a, golds({b.c_str()})).value;
    const double f_ba = token_f1(b, golds({a.c_str()})).value;
    CHECK(f_ab == f_ba);
    CHECK(f_ab >= 0.0);
    CHECK(f_ab <= 1.0);
    const double em = exact_match(a, golds({b.c_str()})).value;
    CHECK((em == 0.0 || em == 1.0));
    if (em == 1.0) {
      CHECK(f_ab == 1.0);
      if (normalize_answer(a) == a && normalize_answer(b) == b) CHECK(rouge_l(a, b).value == 1.0);
    }
    const double r = rouge_l(a, b).value;
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("metrics match the reference scoring script") {
  const auto file = read_jsonl(MRCSPLIT_FIXTURES "/metric_golden.jsonl");
  REQUIRE(file.records.size() == 50);
  for (const auto& rec : file.records) {
    const auto& v = rec.value;
    const std::vector<std::string> g = v.at("golds");
    const std::string pred = v.at("prediction");
    INFO(pred);
    CHECK(exact_match(pred, g).value == v.at("em").get<double>());
    CHECK(token_f1(pred, g).value == v.at("f1").get<double>());
  }
}

TEST_CASE("accuracy and per-item scoring") {
  CanonicalItem mc{"m1", QuestionStyle::MultipleChoice, "ctx", "q?", {}, {"w", "x", "y", "z"}, 2};
  CHECK(accuracy(2, mc).value == 1.0);
  CHECK(accuracy(0, mc).value == 0.0);
  CHECK(testing::error_kind([&] { accuracy(5, mc); }) == ErrorKind::IndexOutOfRange);
  CHECK(testing::error_kind([&] { accuracy(-1, mc); }) == ErrorKind::IndexOutOfRange);
  CHECK(score_item(mc, Prediction{1}).primary.value == 0.0);
  CHECK(testing::error_kind([&] { score_item(mc, Prediction{std::string("w")}); }) ==
        ErrorKind::KindMismatch);

  CanonicalItem ex{"e1", QuestionStyle::Extraction, "In November 2014, Sony", "When?",
                   {"November 2014"}};
  const auto s = score_item(ex, Prediction{std::string("November 2014")});
  CHECK(s.primary.metric == Metric::F1);
  CHECK(s.primary.value == 1.0);
  CHECK(s.em == 1.0);
  CHECK(absent_score(ex).em == 0.0);

  CanonicalItem desc{"d1", QuestionStyle::Description, "ctx", "q?", {"it rains a lot", "wet"}};
  const auto d = score_item(desc, Prediction{std::string("it rains a lot")});
  CHECK(d.primary.metric == Metric::RougeL);
  CHECK(d.primary.value == 1.0);
  CHECK_FALSE(d.em.has_value());
  CHECK(score_item(desc, Prediction{std::string("wet")}).primary.value == 1.0);
}
