#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "automsc/corpus.hpp"

namespace automsc {

/// Which article fields feed the encoder. The seven machine-learning
/// variants are the field subsets of {title, text, mscs}.
struct MethodVariant {
  std::string id;
  bool uses_title = false;
  bool uses_text = false;
  bool uses_mscs = false;

  friend bool operator==(const MethodVariant&, const MethodVariant&) = default;
};

namespace variants {
extern const MethodVariant titer;
extern const MethodVariant refs;
extern const MethodVariant titls;
extern const MethodVariant texts;
extern const MethodVariant tite;
extern const MethodVariant tiref;
extern const MethodVariant teref;
}  // namespace variants

std::span<const MethodVariant> all_variants();

/// Looks a variant up by id; surrounding spaces are ignored ("refs " == "refs").
std::optional<MethodVariant> find_variant(std::string_view id);

/// Text preprocessing applied to title and abstract before tokenization.
struct Preprocessing {
  bool strip_math = false;

  friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

/// title, text and reference field joined by single spaces, in that order,
/// keeping only the fields the variant enables. Empty fields are skipped.
std::string compose_source(const ArticleRecord& a, const MethodVariant& v,
                           const Preprocessing& pre = {});

/// Replaces every TeX math span ($...$, $$...$$, \(...\), \[...\]) with one
/// space. An unterminated span runs to the end of the string. "\$" is text.
std::string strip_math(std::string_view s);

/// Lowercased maximal runs of Unicode letters and digits, keeping runs of two
/// or more code points. Invalid UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view s);

template <typename Scalar = double>
using SparseFeatures = Eigen::SparseVector<Scalar>;
using FeatureVector = SparseFeatures<double>;

/// Row-major document-term matrix, one encoded document per row.
template <typename Scalar = double>
using FeatureMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

struct VocabularyOptions {
  std::int64_t min_df = 1;
};

/// Term index plus smoothed inverse document frequencies,
/// idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1. Indices follow the
/// lexicographic (byte) order of the terms.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Rebuilds a vocabulary from stored state. `terms` must be strictly
  /// increasing; `idf` is taken verbatim.
  Vocabulary(std::vector<std::string> terms, std::vector<std::int64_t> df, std::int64_t n_docs,
             Eigen::VectorXd idf);

  std::size_t size() const noexcept { return terms_.size(); }
  std::int64_t n_docs() const noexcept { return n_docs_; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::int64_t>& document_frequency() const noexcept { return df_; }
  const Eigen::VectorXd& idf() const noexcept { return idf_; }

  std::optional<Eigen::Index> index_of(std::string_view term) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.df_ == b.df_ && a.n_docs_ == b.n_docs_ && a.idf_ == b.idf_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::int64_t> df_;
  std::int64_t n_docs_ = 0;
  Eigen::VectorXd idf_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

/// Throws Error(EmptyCorpus) for an empty document list.
Vocabulary fit_vocabulary(std::span<const std::string> docs, const VocabularyOptions& options = {});

/// Raw term counts times idf, L2-normalized. All-zero when no token of `doc`
/// is in the vocabulary.
FeatureVector encode(std::string_view doc, const Vocabulary& voc);

FeatureMatrix<double> encode_all(std::span<const std::string> docs, const Vocabulary& voc);

}  // namespace automsc
