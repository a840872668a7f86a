#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "automsc/classifier.hpp"
#include "automsc/corpus.hpp"

namespace automsc {

/// counts(t, p) = number of records with true class classes[t] predicted
/// as classes[p]. Rows are true labels, columns predictions.
struct ConfusionMatrix {
  std::vector<Subject> classes;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  std::int64_t total() const { return counts.sum(); }
  Eigen::Index index_of(Subject s) const;
};

struct ClassMetrics {
  Subject subject = 0;
  std::int64_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double share = 0.0;  // support / n
};

struct WeightedMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Entropy {
  double h = 0.0;           // natural-log entropy of the class shares
  double normalized = 0.0;  // h / ln(k), 0 when k == 1
  int k_effective = 0;
};

struct EvalReport {
  std::vector<ClassMetrics> per_class;  // retained classes only
  WeightedMetrics weighted;
  Entropy entropy;
  ConfusionMatrix confusion;  // all classes
  std::int64_t min_class_size = 0;
  std::int64_t n_evaluated = 0;
};

struct ThresholdReport {
  double threshold = 0.0;
  double automation_rate = 0.0;
  double precision_automated = 1.0;
  std::int64_t n_automated = 0;
  std::int64_t n_total = 0;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score = 0.0;  // threshold at which this point is reached
};

using TruthMap = std::unordered_map<DocId, Subject>;

TruthMap truth_map(std::span<const ArticleRecord> records);

/// Throws Error(LengthMismatch) for unequal or empty inputs.
ConfusionMatrix confusion(std::span<const Subject> truth, std::span<const Subject> pred);

/// Per-class precision (diag / column sum), recall (diag / row sum) and F1,
/// each 0 when its denominator is 0. Support is the row sum.
std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm);

/// Support-weighted means over classes with support >= min_class_size.
/// Classes with zero support never count. Throws Error(AllClassesFiltered).
WeightedMetrics weighted_metrics(std::span<const ClassMetrics> per_class, std::int64_t min_class_size);

/// Entropy of the retained class shares. Throws Error(AllClassesFiltered).
Entropy normalized_entropy(std::span<const std::int64_t> supports, std::int64_t min_class_size);

/// Full report for one method from aligned truth/prediction lists.
EvalReport evaluate(std::span<const Subject> truth, std::span<const Subject> pred,
                    std::int64_t min_class_size);

/// Sorted by descending score, one point per distinct score. Precision is
/// the accuracy of the predictions at or above that score, recall the
/// fraction of all predictions covered. Throws Error(MissingScore) or
/// Error(UnknownDe).
std::vector<PrPoint> pr_curve(std::span<const PredictionRecord> preds, const TruthMap& truth);

/// Automates predictions with score > t (strict).
ThresholdReport threshold_analysis(std::span<const PredictionRecord> preds, const TruthMap& truth,
                                   double t);

/// Thresholds 0.00, 0.05, ..., 1.00 plus `extra` if it is not one of them,
/// in ascending order.
std::vector<ThresholdReport> threshold_sweep(std::span<const PredictionRecord> preds,
                                             const TruthMap& truth, double extra);

struct CrossValidationOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  std::int64_t min_class_size = 200;
  Preprocessing preprocessing;
  VocabularyOptions vocabulary;
};

struct CrossValidationResult {
  std::vector<double> fold_f1;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // population standard deviation
  std::vector<int> fold_of;  // fold index per input record
};

/// Stratified, seeded fold assignment: each record's fold, 0..k-1.
/// Throws Error(TooFewPerClass) when a class has fewer than k members.
std::vector<int> stratified_folds(std::span<const ArticleRecord> records, int k, std::uint64_t seed);

/// For each fold, fits vocabulary and model on the other folds and scores
/// the weighted F1 on the held-out fold.
CrossValidationResult kfold_cv(std::span<const ArticleRecord> records, const MethodVariant& variant,
                               const Hyperparams& h, const CrossValidationOptions& options);

// Report exports.
void write_class_report(std::ostream& out, const std::string& method, const EvalReport& r);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);
void write_pr_csv(std::ostream& out, std::span<const PrPoint> curve);
void write_threshold_csv(std::ostream& out, const std::string& method,
                         std::span<const ThresholdReport> rows, bool header = true);

}  // namespace automsc
