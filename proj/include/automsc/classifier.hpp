#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "automsc/corpus.hpp"
#include "automsc/features.hpp"
#include "automsc/lbfgs.hpp"

namespace automsc {

struct Hyperparams {
  double tolerance = 1e-4;
  double regularization_c = 1.0;
  int max_iterations = 100;
  bool fit_intercept = true;
  int lbfgs_memory = 10;

  /// Throws Error(InvalidHyperparams) when a field is out of range.
  void validate() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct TrainingSummary {
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  int iterations = 0;
  double final_loss = 0.0;
  double gradient_max_norm = 0.0;
  std::vector<double> loss_history;
};

struct TrainedModel {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::vector<Subject> classes;  // ascending
  Eigen::MatrixXd weights;       // classes x vocabulary
  Eigen::VectorXd intercepts;
  Vocabulary vocabulary;
  MethodVariant variant;
  Preprocessing preprocessing;
  std::string method_id;  // five characters
  std::int64_t training_size = 0;
  Hyperparams hyperparams;
  TrainingSummary summary;

  Eigen::Index dimension() const noexcept { return weights.cols(); }
};

/// Class probabilities aligned with `classes` (ascending subject order).
struct ClassDistribution {
  std::vector<Subject> classes;
  Eigen::VectorXd probabilities;

  /// Index of the most probable class; ties go to the smallest subject.
  Eigen::Index argmax() const;

  /// The k most probable (subject, probability) pairs, descending by
  /// probability with ties toward the smaller subject.
  std::vector<std::pair<Subject, double>> top(std::size_t k) const;
};

/// One labeled training example.
struct Example {
  FeatureVector features;
  Subject subject = 0;
};

/// Fits weights and intercepts by L-BFGS from zero. Examples are put in a
/// canonical order first, so any permutation of the same multiset produces
/// bit-identical weights. The returned model has no vocabulary or variant;
/// fit_model fills those in.
TrainedModel train(std::span<const Example> examples, const Hyperparams& h);

/// Composes sources per `variant`, fits the vocabulary on them and trains.
TrainedModel fit_model(std::span<const ArticleRecord> articles, const MethodVariant& variant,
                       const Hyperparams& h, const Preprocessing& pre = {},
                       const VocabularyOptions& vocab = {});

/// Softmax of weights * x + intercepts. Throws Error(DimensionMismatch).
ClassDistribution predict_proba(const TrainedModel& m, const FeatureVector& x);

/// Encodes the article with the model's variant and vocabulary.
ClassDistribution classify(const TrainedModel& m, const ArticleRecord& a);

/// Top-1 prediction row (pos 1, no fine code, score = winning probability).
PredictionRecord predict(const TrainedModel& m, const ArticleRecord& a);

/// Majority vote over the primary subjects of all reference codes.
/// Throws Error(NoReferences) when the article has no reference codes.
PredictionRecord ref1_vote(const ArticleRecord& a);

inline const std::string kRef1MethodId = "ref1 ";

void save_model(const TrainedModel& m, std::ostream& out);

/// Throws Error(VersionMismatch) for an unknown format version,
/// Error(CorruptFile) for truncation or checksum failure, and
/// Error(DimensionMismatch) when weights disagree with the vocabulary.
TrainedModel load_model(std::istream& in);

void save_model(const TrainedModel& m, const std::string& path);
TrainedModel load_model(const std::string& path);

/// Stable identifier derived from the serialized model bytes.
std::string model_version(const TrainedModel& m);

}  // namespace automsc
