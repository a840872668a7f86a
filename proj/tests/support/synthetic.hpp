#pragma once

// Test-only corpus generators.

#include <array>
#include <cstdio>
#include <unistd.h>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "automsc/corpus.hpp"
#include "automsc/random.hpp"

namespace automsc::testing {

/// Articles whose three fields carry class evidence of different strength.
/// Each class owns marker words and a pool of MSC codes under its subject.
/// References point to the article's own class with probability
/// 1 - ref_flip and to a random other class otherwise.
struct SyntheticOptions {
  int n_articles = 5000;
  int n_classes = 10;
  double ref_flip = 0.2;
  std::uint64_t seed = 1;

  int title_min = 4, title_max = 8;
  double title_marker = 0.25, title_noise = 0.10;
  int text_min = 25, text_max = 45;
  double text_marker = 0.10, text_noise = 0.04;
  int refs_min = 2, refs_max = 6;
  // Codes inside one reference are concatenated in the mscs field and so form
  // a single compound token; most real references carry one code.
  int codes_per_ref_max = 1;
  double math_rate = 0.3;
};

inline const std::array<Subject, 16> kSubjects = {5, 11, 14, 20, 35, 46, 53, 60, 68, 81,
                                                  83, 90, 3, 17, 57, 97};

namespace detail {

inline std::string letters(std::uint64_t v, int width) {
  std::string s;
  for (int i = 0; i < width; ++i) {
    s.push_back(static_cast<char>('a' + v % 26));
    v /= 26;
  }
  return s;
}

inline MscCode class_code(Subject subject, std::uint64_t variant) {
  char buf[8];
  const char mid = static_cast<char>('A' + variant % 8);
  std::snprintf(buf, sizeof buf, "%02d%c%02d", subject, mid, static_cast<int>(variant / 8 % 20 * 5));
  return MscCode::parse(buf);
}

}  // namespace detail

inline std::vector<ArticleRecord> make_synthetic_corpus(const SyntheticOptions& o) {
  std::mt19937_64 rng(o.seed);
  auto uniform = [&rng](int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
  };
  auto coin = [&rng](double p) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
  };
  auto other_class = [&](int c) {
    int d = uniform(0, o.n_classes - 2);
    return d >= c ? d + 1 : d;
  };
  auto marker = [&](int c) { return "mk" + detail::letters(static_cast<std::uint64_t>(c * 40 + uniform(0, 39)), 3); };
  auto shared = [&] { return "sw" + detail::letters(static_cast<std::uint64_t>(uniform(0, 599)), 3); };
  auto word_for = [&](int c, double p_marker, double p_noise) {
    if (coin(p_marker)) return marker(c);
    if (coin(p_noise)) return marker(other_class(c));
    return shared();
  };

  std::vector<ArticleRecord> out;
  out.reserve(static_cast<std::size_t>(o.n_articles));
  for (int i = 0; i < o.n_articles; ++i) {
    // skewed class sizes: class c is drawn with weight proportional to (n_classes + 3 - c)
    int total = 0;
    for (int c = 0; c < o.n_classes; ++c) total += o.n_classes + 3 - c;
    int draw = uniform(0, total - 1);
    int cls = 0;
    while (draw >= o.n_classes + 3 - cls) draw -= o.n_classes + 3 - cls++;

    ArticleRecord a;
    a.de = static_cast<DocId>(10'000'000 + i);
    const Subject subject = kSubjects[static_cast<std::size_t>(cls)];
    a.labels.push_back(detail::class_code(subject, static_cast<std::uint64_t>(uniform(0, 159))));
    if (coin(0.5)) {
      a.labels.push_back(detail::class_code(kSubjects[static_cast<std::size_t>(other_class(cls))],
                                            static_cast<std::uint64_t>(uniform(0, 159))));
    }

    const int title_len = uniform(o.title_min, o.title_max);
    for (int w = 0; w < title_len; ++w) {
      if (w) a.title.push_back(' ');
      a.title += word_for(cls, o.title_marker, o.title_noise);
    }
    const int text_len = uniform(o.text_min, o.text_max);
    for (int w = 0; w < text_len; ++w) {
      if (w) a.text.push_back(' ');
      a.text += word_for(cls, o.text_marker, o.text_noise);
      if (coin(o.math_rate / text_len)) a.text += " $x^2 + y_" + std::to_string(w) + "$";
    }
    a.text.push_back('.');

    const int n_refs = uniform(o.refs_min, o.refs_max);
    for (int r = 0; r < n_refs; ++r) {
      const int ref_cls = coin(o.ref_flip) ? other_class(cls) : cls;
      const Subject ref_subject = kSubjects[static_cast<std::size_t>(ref_cls)];
      Reference ref;
      const int n_codes = uniform(1, o.codes_per_ref_max);
      for (int k = 0; k < n_codes; ++k) {
        ref.push_back(detail::class_code(ref_subject, static_cast<std::uint64_t>(uniform(0, 39))));
      }
      a.ref_mscs.push_back(std::move(ref));
    }
    out.push_back(std::move(a));
  }
  return out;
}

/// Corpus where each class has a unique marker token in every field, so
/// any variant separates it perfectly. `per_class` articles per class.
inline std::vector<ArticleRecord> make_separable_corpus(int n_classes, int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ArticleRecord> out;
  DocId de = 20'000'000;
  for (int c = 0; c < n_classes; ++c) {
    const Subject subject = kSubjects[static_cast<std::size_t>(c)];
    for (int i = 0; i < per_class; ++i) {
      ArticleRecord a;
      a.de = de++;
      a.labels.push_back(detail::class_code(subject, 0));
      const std::string marker = "unique" + detail::letters(static_cast<std::uint64_t>(c), 2);
      a.title = marker + " on sw" + detail::letters(rng() % 50, 2);
      a.text = "we study " + marker + " and sw" + detail::letters(rng() % 50, 2);
      a.ref_mscs.push_back({detail::class_code(subject, 1)});
      out.push_back(std::move(a));
    }
  }
  // interleave classes so input order carries no label information
  portable_shuffle(std::span(out), rng);
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("automsc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace automsc::testing
