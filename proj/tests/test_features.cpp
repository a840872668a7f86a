#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "automsc/error.hpp"
#include "automsc/features.hpp"
#include "automsc/random.hpp"

using namespace automsc;
using Strings = std::vector<std::string>;

namespace {

// Independent scanner: walks the string once, tracking which delimiter opened
// the current span.
std::string reference_strip(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::string close;
    std::size_t open_len = 0;
    // a backslash escapes the next character unless it opens \( or \[
    if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] != '(' && s[i + 1] != '[') {
      out += s.substr(i, 2);
      i += 2;
      continue;
    }
    if (s.compare(i, 2, "$$") == 0) {
      close = "$$";
      open_len = 2;
    } else if (s[i] == '$') {
      close = "$";
      open_len = 1;
    } else if (s.compare(i, 2, "\\(") == 0) {
      close = "\\)";
      open_len = 2;
    } else if (s.compare(i, 2, "\\[") == 0) {
      close = "\\]";
      open_len = 2;
    }
    if (close.empty()) {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t j = i + open_len;
    std::size_t end = std::string::npos;
    while (j < s.size()) {
      if (close[0] == '$' && s[j] == '\\' && j + 1 < s.size()) {
        j += 2;  // escaped char inside dollar math
        continue;
      }
      if (s.compare(j, close.size(), close) == 0) {
        end = j + close.size();
        break;
      }
      ++j;
    }
    out.push_back(' ');
    if (end == std::string::npos) break;
    i = end;
  }
  return out;
}

double dense_norm(const FeatureVector& v) { return std::sqrt(v.squaredNorm()); }

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("compose_source") {
  ArticleRecord a;
  a.labels = {parse_msc_code("57M25")};
  a.title = "Knots";
  a.text = "We study";
  a.ref_mscs = parse_ref_mscs("57M25");
  CHECK(compose_source(a, variants::titer) == "Knots We study 57M25");
  CHECK(compose_source(a, variants::refs) == "57M25");
  CHECK(compose_source(a, variants::tite) == "Knots We study");
  CHECK(compose_source(a, variants::titls) == "Knots");
  CHECK(compose_source(a, variants::texts) == "We study");
  CHECK(compose_source(a, variants::tiref) == "Knots 57M25");
  CHECK(compose_source(a, variants::teref) == "We study 57M25");

  a.text.clear();
  CHECK(compose_source(a, variants::titer) == "Knots 57M25");
  a.title = "On $x$ knots";
  CHECK(compose_source(a, variants::titls, Preprocessing{true}) == "On   knots");
}

TEST_CASE("variant lookup") {
  CHECK(all_variants().size() == 7);
  CHECK(find_variant("refs ") == variants::refs);
  CHECK(find_variant("titer") == variants::titer);
  CHECK(!find_variant("ref1"));
  CHECK(!find_variant("bogus"));
}

TEST_CASE("strip_math examples") {
  CHECK(strip_math("no math here") == "no math here");
  CHECK(strip_math("solves $x^2=2$ exactly") == "solves   exactly");
  CHECK(tokenize(strip_math("solves $x^2=2$ exactly")) == tokenize("solves exactly"));
  CHECK(strip_math("$a$$b$") == "  ");
  CHECK(strip_math("$$\\int f$$ then \\(y\\) and \\[z\\]") == "  then   and  ");
  CHECK(strip_math("costs \\$5 and $x") == "costs \\$5 and  ");
  CHECK(strip_math("open \\[ never closed") == "open  ");
}

TEST_CASE("strip_math agrees with a reference scan") {
  std::mt19937_64 rng(21);
  const Strings alphabet = {"a", "b", " ", "$", "$$", "\\(", "\\)", "\\[", "\\]", "\\$", "\\", "x^2", "é"};
  for (int trial = 0; trial < 5000; ++trial) {
    std::string s;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    CAPTURE(s);
    CHECK(strip_math(s) == reference_strip(s));
  }
}

TEST_CASE("tokenize examples") {
  CHECK(tokenize("Graph coloring, 2-colorable!") == Strings{"graph", "coloring", "colorable"});
  CHECK(tokenize("a I x").empty());
  CHECK(tokenize("68T50") == Strings{"68t50"});
  CHECK(tokenize("68T5003B70,81Q05") == Strings{"68t5003b70", "81q05"});
  CHECK(tokenize("Über Flüsse") == Strings{"über", "flüsse"});
  CHECK(tokenize("ΑΒΓ set") == Strings{"αβγ", "set"});
  CHECK(tokenize("snake_case") == Strings{"snake", "case"});
  CHECK(tokenize("ab\xff\xfe" "cd") == Strings{"ab", "cd"});
  CHECK(tokenize("").empty());
}

TEST_CASE("tokenize ignores strip_math when there is no math") {
  std::mt19937_64 rng(8);
  const Strings alphabet = {"a", "bc", " ", ",", "Ä", "7", "-", "\\alpha", "{", "}"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const int n = static_cast<int>(rng() % 15);
    for (int i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    CHECK(tokenize(strip_math(s)) == tokenize(s));
  }
}

TEST_CASE("fit_vocabulary examples") {
  const Strings docs = {"aa bb", "aa"};
  const Vocabulary voc = fit_vocabulary(docs);
  REQUIRE(voc.size() == 2);
  CHECK(voc.terms() == Strings{"aa", "bb"});
  CHECK(voc.document_frequency() == std::vector<std::int64_t>{2, 1});
  CHECK(voc.idf()(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(voc.idf()(1) - 1.405465) < 1e-6);
  CHECK(std::abs(voc.idf()(1) - (std::log(1.5) + 1.0)) < 1e-15);

  const Strings single = {"aa"};
  CHECK(fit_vocabulary(single).idf()(0) == 1.0);

  try {
    fit_vocabulary(Strings{});
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyCorpus);
  }

  const Strings repeated = {"aa aa aa", "bb"};
  CHECK(fit_vocabulary(repeated).document_frequency() == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("min_df prunes rare terms") {
  const Strings docs = {"aa bb", "aa cc", "dd"};
  const Vocabulary voc = fit_vocabulary(docs, {.min_df = 2});
  CHECK(voc.terms() == Strings{"aa"});
  CHECK(voc.n_docs() == 3);
}

TEST_CASE("encode examples") {
  const Strings docs = {"aa bb", "aa"};
  const Vocabulary voc = fit_vocabulary(docs);

  const FeatureVector v = encode("aa aa bb", voc);
  REQUIRE(v.size() == 2);
  // The commonly quoted rounding (0.818379, 0.575186) is not itself unit
  // length; the exact values are 2/sqrt(4 + idf^2) and idf/sqrt(4 + idf^2).
  CHECK(std::abs(v.coeff(0) - 0.818180) < 1e-6);
  CHECK(std::abs(v.coeff(1) - 0.574962) < 1e-6);
  const double a = 2.0, b = std::log(1.5) + 1.0, n = std::hypot(a, b);
  CHECK(std::abs(v.coeff(0) - a / n) < 1e-9);
  CHECK(std::abs(v.coeff(1) - b / n) < 1e-9);

  CHECK(encode("zz", voc).nonZeros() == 0);
  const FeatureVector unit = encode("aa", voc);
  CHECK(unit.nonZeros() == 1);
  CHECK(unit.coeff(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("vocabulary and encoding properties") {
  std::mt19937_64 rng(17);
  const Strings words = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "iota", "kappa", "x", "Ω"};
  for (int trial = 0; trial < 200; ++trial) {
    Strings docs;
    const int n_docs = 1 + static_cast<int>(rng() % 10);
    for (int d = 0; d < n_docs; ++d) {
      std::string doc;
      const int len = static_cast<int>(rng() % 8);
      for (int w = 0; w < len; ++w) doc += words[rng() % words.size()] + " ";
      docs.push_back(doc);
    }
    const Vocabulary voc = fit_vocabulary(docs);

    // idf formula and lexicographic indexing
    CHECK(std::is_sorted(voc.terms().begin(), voc.terms().end()));
    for (std::size_t t = 0; t < voc.size(); ++t) {
      const double expected =
          std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(voc.document_frequency()[t]))) + 1.0;
      CHECK(std::abs(voc.idf()(static_cast<Eigen::Index>(t)) - expected) < 1e-15);
      CHECK(voc.index_of(voc.terms()[t]) == static_cast<Eigen::Index>(t));
    }

    // order of documents does not matter
    Strings shuffled = docs;
    portable_shuffle(std::span(shuffled), rng);
    CHECK(fit_vocabulary(shuffled) == voc);

    // unit norm, bag of words
    for (const auto& doc : docs) {
      const FeatureVector v = encode(doc, voc);
      if (v.nonZeros() > 0) CHECK(std::abs(dense_norm(v) - 1.0) < 1e-9);
      auto toks = tokenize(doc);
      portable_shuffle(std::span(toks), rng);
      std::string reordered;
      for (const auto& t : toks) reordered += t + " ";
      const FeatureVector w = encode(reordered, voc);
      CHECK(max_abs_diff(Eigen::VectorXd(v), Eigen::VectorXd(w)) == 0.0);
    }

    // encode_all rows match encode
    const auto m = encode_all(docs, voc);
    REQUIRE(m.rows() == n_docs);
    for (int d = 0; d < n_docs; ++d) {
      const Eigen::VectorXd row = Eigen::RowVectorXd(m.row(d)).transpose();
      CHECK(max_abs_diff(row, Eigen::VectorXd(encode(docs[static_cast<std::size_t>(d)], voc))) == 0.0);
    }
  }
}

TEST_CASE("Vocabulary rejects unsorted stored terms") {
  try {
    Vocabulary bad({"bb", "aa"}, {1, 1}, 2, Eigen::VectorXd::Ones(2));
    FAIL("expected CorruptFile");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CorruptFile);
  }
}
