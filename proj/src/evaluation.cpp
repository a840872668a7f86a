#include "automsc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>

#include "automsc/error.hpp"
#include "automsc/log.hpp"
#include "automsc/random.hpp"

namespace automsc {

namespace {

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

bool retained(std::int64_t support, std::int64_t min_class_size) {
  return support > 0 && support >= min_class_size;
}

Subject truth_of(const PredictionRecord& p, const TruthMap& truth) {
  const auto it = truth.find(p.de);
  if (it == truth.end()) {
    throw Error(ErrorKind::UnknownDe, "prediction for unknown document " + format_de(p.de));
  }
  return it->second;
}

double score_of(const PredictionRecord& p) {
  if (!p.score) {
    throw Error(ErrorKind::MissingScore, "prediction for document " + format_de(p.de) + " has no score");
  }
  return *p.score;
}

}  // namespace

Eigen::Index ConfusionMatrix::index_of(Subject s) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), s);
  if (it == classes.end() || *it != s) return -1;
  return it - classes.begin();
}

TruthMap truth_map(std::span<const ArticleRecord> records) {
  TruthMap truth;
  truth.reserve(records.size());
  for (const auto& a : records) truth.emplace(a.de, a.primary());
  return truth;
}

ConfusionMatrix confusion(std::span<const Subject> truth, std::span<const Subject> pred) {
  if (truth.size() != pred.size() || truth.empty()) {
    throw Error(ErrorKind::LengthMismatch, "truth has " + std::to_string(truth.size()) +
                                               " entries and predictions " + std::to_string(pred.size()));
  }
  ConfusionMatrix cm;
  cm.classes.assign(truth.begin(), truth.end());
  cm.classes.insert(cm.classes.end(), pred.begin(), pred.end());
  std::sort(cm.classes.begin(), cm.classes.end());
  cm.classes.erase(std::unique(cm.classes.begin(), cm.classes.end()), cm.classes.end());
  const auto k = static_cast<Eigen::Index>(cm.classes.size());
  cm.counts.setZero(k, k);
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts(cm.index_of(truth[i]), cm.index_of(pred[i]));
  return cm;
}

std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm) {
  const auto row_sums = cm.counts.rowwise().sum().eval();
  const auto col_sums = cm.counts.colwise().sum().eval();
  const auto n = static_cast<double>(cm.total());
  std::vector<ClassMetrics> out;
  out.reserve(cm.classes.size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(cm.classes.size()); ++i) {
    ClassMetrics m;
    m.subject = cm.classes[static_cast<std::size_t>(i)];
    m.support = row_sums[i];
    const auto tp = static_cast<double>(cm.counts(i, i));
    m.precision = col_sums[i] > 0 ? tp / static_cast<double>(col_sums[i]) : 0.0;
    m.recall = row_sums[i] > 0 ? tp / static_cast<double>(row_sums[i]) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.share = n > 0 ? static_cast<double>(m.support) / n : 0.0;
    out.push_back(m);
  }
  return out;
}

WeightedMetrics weighted_metrics(std::span<const ClassMetrics> per_class, std::int64_t min_class_size) {
  std::int64_t n = 0;
  WeightedMetrics w;
  for (const auto& c : per_class) {
    if (!retained(c.support, min_class_size)) continue;
    n += c.support;
    const auto s = static_cast<double>(c.support);
    w.precision += s * c.precision;
    w.recall += s * c.recall;
    w.f1 += s * c.f1;
  }
  if (n == 0) {
    throw Error(ErrorKind::AllClassesFiltered,
                "no class has at least " + std::to_string(min_class_size) + " records");
  }
  const auto dn = static_cast<double>(n);
  w.precision /= dn;
  w.recall /= dn;
  w.f1 /= dn;
  return w;
}

Entropy normalized_entropy(std::span<const std::int64_t> supports, std::int64_t min_class_size) {
  std::int64_t n = 0;
  Entropy e;
  for (auto s : supports) {
    if (!retained(s, min_class_size)) continue;
    n += s;
    ++e.k_effective;
  }
  if (n == 0) {
    throw Error(ErrorKind::AllClassesFiltered,
                "no class has at least " + std::to_string(min_class_size) + " records");
  }
  for (auto s : supports) {
    if (!retained(s, min_class_size)) continue;
    const double p = static_cast<double>(s) / static_cast<double>(n);
    e.h -= p * std::log(p);
  }
  e.normalized = e.k_effective > 1 ? e.h / std::log(static_cast<double>(e.k_effective)) : 0.0;
  return e;
}

EvalReport evaluate(std::span<const Subject> truth, std::span<const Subject> pred,
                    std::int64_t min_class_size) {
  EvalReport r;
  r.confusion = confusion(truth, pred);
  r.min_class_size = min_class_size;
  r.n_evaluated = static_cast<std::int64_t>(truth.size());
  const auto all = class_metrics(r.confusion);
  r.weighted = weighted_metrics(all, min_class_size);

  std::vector<std::int64_t> supports;
  std::int64_t n_retained = 0;
  for (const auto& c : all) {
    supports.push_back(c.support);
    if (retained(c.support, min_class_size)) {
      r.per_class.push_back(c);
      n_retained += c.support;
    }
  }
  for (auto& c : r.per_class) c.share = static_cast<double>(c.support) / static_cast<double>(n_retained);
  r.entropy = normalized_entropy(supports, min_class_size);
  return r;
}

std::vector<PrPoint> pr_curve(std::span<const PredictionRecord> preds, const TruthMap& truth) {
  struct Scored {
    double score;
    bool correct;
  };
  std::vector<Scored> scored;
  scored.reserve(preds.size());
  for (const auto& p : preds) scored.push_back({score_of(p), truth_of(p, truth) == p.coarse});
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });

  std::vector<PrPoint> curve;
  const auto n = static_cast<double>(scored.size());
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    correct += scored[i].correct ? 1 : 0;
    if (i + 1 < scored.size() && scored[i + 1].score == scored[i].score) continue;
    const auto taken = static_cast<double>(i + 1);
    curve.push_back({taken / n, static_cast<double>(correct) / taken, scored[i].score});
  }
  return curve;
}

ThresholdReport threshold_analysis(std::span<const PredictionRecord> preds, const TruthMap& truth,
                                   double t) {
  ThresholdReport r;
  r.threshold = t;
  r.n_total = static_cast<std::int64_t>(preds.size());
  std::int64_t correct = 0;
  for (const auto& p : preds) {
    const double s = score_of(p);
    const bool ok = truth_of(p, truth) == p.coarse;
    if (s > t) {
      ++r.n_automated;
      correct += ok ? 1 : 0;
    }
  }
  r.automation_rate =
      r.n_total > 0 ? static_cast<double>(r.n_automated) / static_cast<double>(r.n_total) : 0.0;
  r.precision_automated =
      r.n_automated > 0 ? static_cast<double>(correct) / static_cast<double>(r.n_automated) : 1.0;
  return r;
}

std::vector<ThresholdReport> threshold_sweep(std::span<const PredictionRecord> preds,
                                             const TruthMap& truth, double extra) {
  std::vector<double> ts;
  bool extra_present = false;
  for (int i = 0; i <= 20; ++i) {
    const double t = i / 20.0;
    ts.push_back(t);
    if (std::abs(t - extra) < 1e-12) extra_present = true;
  }
  if (!extra_present) ts.push_back(extra);
  std::sort(ts.begin(), ts.end());
  std::vector<ThresholdReport> rows;
  rows.reserve(ts.size());
  for (double t : ts) rows.push_back(threshold_analysis(preds, truth, t));
  return rows;
}

std::vector<int> stratified_folds(std::span<const ArticleRecord> records, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::Usage, "cross-validation needs at least 2 folds");
  std::map<Subject, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) by_class[records[i].primary()].push_back(i);
  for (const auto& [subject, members] : by_class) {
    if (static_cast<int>(members.size()) < k) {
      throw Error(ErrorKind::TooFewPerClass, "subject " + std::to_string(subject) + " has " +
                                                 std::to_string(members.size()) +
                                                 " records, fewer than " + std::to_string(k) + " folds");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold(records.size(), -1);
  std::size_t offset = 0;
  for (auto& [subject, members] : by_class) {
    portable_shuffle(std::span(members), rng);
    for (std::size_t j = 0; j < members.size(); ++j) {
      fold[members[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    }
    offset += members.size();
  }
  return fold;
}

CrossValidationResult kfold_cv(std::span<const ArticleRecord> records, const MethodVariant& variant,
                               const Hyperparams& h, const CrossValidationOptions& options) {
  CrossValidationResult result;
  result.fold_of = stratified_folds(records, options.folds, options.seed);

  for (int f = 0; f < options.folds; ++f) {
    std::vector<ArticleRecord> train_set, test_set;
    for (std::size_t i = 0; i < records.size(); ++i) {
      (result.fold_of[i] == f ? test_set : train_set).push_back(records[i]);
    }
    const TrainedModel m = fit_model(train_set, variant, h, options.preprocessing, options.vocabulary);
    std::vector<Subject> truth, pred;
    for (const auto& a : test_set) {
      truth.push_back(a.primary());
      pred.push_back(predict(m, a).coarse);
    }
    const double f1 = evaluate(truth, pred, options.min_class_size).weighted.f1;
    spdlog::info("fold {}/{}: train {} test {} weighted f {:.4f}", f + 1, options.folds,
                 train_set.size(), test_set.size(), f1);
    result.fold_f1.push_back(f1);
  }

  double sum = 0.0;
  for (double v : result.fold_f1) sum += v;
  result.mean_f1 = sum / static_cast<double>(result.fold_f1.size());
  double var = 0.0;
  for (double v : result.fold_f1) var += (v - result.mean_f1) * (v - result.mean_f1);
  result.std_f1 = std::sqrt(var / static_cast<double>(result.fold_f1.size()));
  return result;
}

void write_class_report(std::ostream& out, const std::string& method, const EvalReport& r) {
  out << "# method=" << method << '\n'
      << "# n=" << r.n_evaluated << " min_class_size=" << r.min_class_size
      << " k_effective=" << r.entropy.k_effective << '\n'
      << "# H=" << fmt_real(r.entropy.h) << " H_normalized=" << fmt_real(r.entropy.normalized) << '\n'
      << "subject,support,P_i,p,r,f\n";
  char subject[8];
  for (const auto& c : r.per_class) {
    std::snprintf(subject, sizeof subject, "%02d", c.subject);
    out << subject << ',' << c.support << ',' << fmt_real(c.share) << ',' << fmt_real(c.precision)
        << ',' << fmt_real(c.recall) << ',' << fmt_real(c.f1) << '\n';
  }
  std::int64_t n_retained = 0;
  for (const auto& c : r.per_class) n_retained += c.support;
  out << "weighted," << n_retained << ",1.000000," << fmt_real(r.weighted.precision) << ','
      << fmt_real(r.weighted.recall) << ',' << fmt_real(r.weighted.f1) << '\n';
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "true\\predicted";
  for (auto s : cm.classes) out << ',' << s;
  out << '\n';
  for (Eigen::Index i = 0; i < cm.counts.rows(); ++i) {
    out << cm.classes[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cm.counts.cols(); ++j) out << ',' << cm.counts(i, j);
    out << '\n';
  }
}

void write_pr_csv(std::ostream& out, std::span<const PrPoint> curve) {
  out << "score,recall,precision\n";
  for (const auto& p : curve) {
    out << fmt_real(p.score) << ',' << fmt_real(p.recall) << ',' << fmt_real(p.precision) << '\n';
  }
}

void write_threshold_csv(std::ostream& out, const std::string& method,
                         std::span<const ThresholdReport> rows, bool header) {
  if (header) out << "method,threshold,automation_rate,precision_automated,n_automated,n_total\n";
  for (const auto& r : rows) {
    out << method << ',' << fmt_real(r.threshold) << ',' << fmt_real(r.automation_rate) << ','
        << fmt_real(r.precision_automated) << ',' << r.n_automated << ',' << r.n_total << '\n';
  }
}

}  // namespace automsc
