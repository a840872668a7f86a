#include "automsc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "automsc/error.hpp"
#include "automsc/log.hpp"
#include "automsc/softmax_loss.hpp"

namespace automsc {

void Hyperparams::validate() const {
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidHyperparams, "tolerance must be > 0");
  if (!(regularization_c > 0.0)) {
    throw Error(ErrorKind::InvalidHyperparams, "regularization C must be > 0");
  }
  if (max_iterations < 1) throw Error(ErrorKind::InvalidHyperparams, "max_iterations must be >= 1");
  if (lbfgs_memory < 1) throw Error(ErrorKind::InvalidHyperparams, "lbfgs_memory must be >= 1");
}

Eigen::Index ClassDistribution::argmax() const {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probabilities.size(); ++i) {
    if (probabilities[i] > probabilities[best]) best = i;
  }
  return best;
}

std::vector<std::pair<Subject, double>> ClassDistribution::top(std::size_t k) const {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(probabilities.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // classes are ascending, so a stable sort keeps ties toward the smaller subject
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return probabilities[a] > probabilities[b]; });
  k = std::min(k, order.size());
  std::vector<std::pair<Subject, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.emplace_back(classes[static_cast<std::size_t>(order[i])], probabilities[order[i]]);
  }
  return out;
}

namespace {

bool canonical_less(const Example& a, const Example& b) {
  if (a.subject != b.subject) return a.subject < b.subject;
  FeatureVector::InnerIterator ia(a.features), ib(b.features);
  for (; ia && ib; ++ia, ++ib) {
    if (ia.index() != ib.index()) return ia.index() < ib.index();
    if (ia.value() != ib.value()) return ia.value() < ib.value();
  }
  return !ia && static_cast<bool>(ib);
}

}  // namespace

TrainedModel train(std::span<const Example> examples, const Hyperparams& h) {
  h.validate();

  std::vector<Subject> classes;
  for (const auto& e : examples) classes.push_back(e.subject);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) {
    throw Error(ErrorKind::SingleClass, "training needs at least two distinct subjects, got " +
                                            std::to_string(classes.size()));
  }
  const Eigen::Index dim = examples.front().features.size();
  for (const auto& e : examples) {
    if (e.features.size() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "training vectors have dimensions " +
                                                    std::to_string(dim) + " and " +
                                                    std::to_string(e.features.size()));
    }
  }

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return canonical_less(examples[a], examples[b]);
  });

  const auto n = static_cast<Eigen::Index>(examples.size());
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<int> labels(examples.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& e = examples[order[r]];
    labels[r] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), e.subject) -
                                 classes.begin());
    for (FeatureVector::InnerIterator it(e.features); it; ++it) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
    }
  }
  FeatureMatrix<double> x(n, dim);
  x.setFromTriplets(triplets.begin(), triplets.end());

  const auto k = static_cast<int>(classes.size());
  SoftmaxLoss<double> loss(x, labels, k, h.regularization_c, h.fit_intercept);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(loss.parameter_count());

  LbfgsOptions<double> options;
  options.tolerance = h.tolerance;
  options.max_iterations = h.max_iterations;
  options.memory = h.lbfgs_memory;
  const auto result = lbfgs_minimize<double>(loss, params, options);
  if (result.status == LbfgsStatus::NonFinite) {
    throw Error(ErrorKind::NonFinite, "loss or gradient became non-finite after " +
                                          std::to_string(result.iterations) + " iterations");
  }
  if (result.status == LbfgsStatus::LineSearchFailed) {
    spdlog::warn("line search failed after {} iterations (gradient max-norm {:.3g})",
                 result.iterations, result.gradient_max_norm);
  } else if (result.status == LbfgsStatus::MaxIterations) {
    spdlog::info("L-BFGS stopped at the iteration budget ({}) with gradient max-norm {:.3g}",
                 result.iterations, result.gradient_max_norm);
  }

  TrainedModel m;
  m.classes = std::move(classes);
  m.weights = loss.weights(params);
  m.intercepts = loss.intercepts(params);
  m.training_size = n;
  m.hyperparams = h;
  m.summary = {result.status, result.iterations, result.value, result.gradient_max_norm,
               result.history};
  return m;
}

TrainedModel fit_model(std::span<const ArticleRecord> articles, const MethodVariant& variant,
                       const Hyperparams& h, const Preprocessing& pre, const VocabularyOptions& vocab) {
  std::vector<std::string> sources;
  sources.reserve(articles.size());
  for (const auto& a : articles) sources.push_back(compose_source(a, variant, pre));
  Vocabulary voc = fit_vocabulary(sources, vocab);

  std::vector<Example> examples;
  examples.reserve(articles.size());
  for (std::size_t i = 0; i < articles.size(); ++i) {
    examples.push_back({encode(sources[i], voc), articles[i].primary()});
  }
  TrainedModel m = train(examples, h);
  m.vocabulary = std::move(voc);
  m.variant = variant;
  m.preprocessing = pre;
  m.method_id = pad_method_id(variant.id);
  return m;
}

ClassDistribution predict_proba(const TrainedModel& m, const FeatureVector& x) {
  if (x.size() != m.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "feature vector has dimension " +
                                                  std::to_string(x.size()) + ", model expects " +
                                                  std::to_string(m.dimension()));
  }
  Eigen::VectorXd z = m.intercepts;
  for (FeatureVector::InnerIterator it(x); it; ++it) z += it.value() * m.weights.col(it.index());
  z.array() -= z.maxCoeff();
  z = z.array().exp();
  z /= z.sum();
  return {m.classes, std::move(z)};
}

ClassDistribution classify(const TrainedModel& m, const ArticleRecord& a) {
  if (m.vocabulary.size() != static_cast<std::size_t>(m.dimension())) {
    throw Error(ErrorKind::DimensionMismatch, "model vocabulary has " +
                                                  std::to_string(m.vocabulary.size()) +
                                                  " terms but weights have " +
                                                  std::to_string(m.dimension()) + " columns");
  }
  return predict_proba(m, encode(compose_source(a, m.variant, m.preprocessing), m.vocabulary));
}

PredictionRecord predict(const TrainedModel& m, const ArticleRecord& a) {
  const ClassDistribution dist = classify(m, a);
  const Eigen::Index best = dist.argmax();
  PredictionRecord p;
  p.de = a.de;
  p.method = m.method_id;
  p.pos = 1;
  p.coarse = dist.classes[static_cast<std::size_t>(best)];
  p.score = dist.probabilities[best];
  return p;
}

PredictionRecord ref1_vote(const ArticleRecord& a) {
  std::map<Subject, long> counts;
  long total = 0;
  for (const auto& ref : a.ref_mscs) {
    for (const auto& code : ref) {
      ++counts[code.subject()];
      ++total;
    }
  }
  if (total == 0) {
    throw Error(ErrorKind::NoReferences, "document " + format_de(a.de) + " has no reference codes");
  }
  // std::map iterates in ascending subject order; strict > keeps the smallest on ties
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  PredictionRecord p;
  p.de = a.de;
  p.method = kRef1MethodId;
  p.pos = 1;
  p.coarse = best->first;
  p.score = static_cast<double>(best->second) / static_cast<double>(total);
  return p;
}

}  // namespace automsc
