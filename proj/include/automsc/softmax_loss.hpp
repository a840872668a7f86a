#pragma once

#include <cmath>
#include <span>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace automsc {

/// Multinomial cross-entropy with an L2 penalty on the weights, averaged
/// over examples:
///
///   L(W, b) = (1/n) sum_i [logsumexp(W x_i + b) - (W x_i + b)_{y_i}]
///             + ||W||^2 / (2 C n)
///
/// n times L is the summed cross-entropy plus ||W||^2 / (2C), so both share
/// a minimizer. Intercepts are not penalized.
///
/// Parameters are packed as the column-major K x V weight matrix followed
/// by the K intercepts (omitted when fit_intercept is false).
template <typename Scalar>
class SoftmaxLoss {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Features = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  /// `labels[i]` is the class index (0..n_classes-1) of row i of `features`.
  SoftmaxLoss(const Features& features, std::span<const int> labels, int n_classes,
              Scalar regularization_c, bool fit_intercept)
      : x_(features),
        labels_(labels),
        k_(n_classes),
        inv_c_(Scalar(1) / regularization_c),
        fit_intercept_(fit_intercept) {}

  Eigen::Index n_classes() const noexcept { return k_; }
  Eigen::Index n_features() const noexcept { return x_.cols(); }
  Eigen::Index parameter_count() const noexcept {
    return k_ * x_.cols() + (fit_intercept_ ? k_ : 0);
  }

  Eigen::Map<const Matrix> weights(const Vector& params) const {
    return Eigen::Map<const Matrix>(params.data(), k_, x_.cols());
  }
  Vector intercepts(const Vector& params) const {
    if (!fit_intercept_) return Vector::Zero(k_);
    return params.segment(k_ * x_.cols(), k_);
  }

  Scalar operator()(const Vector& params, Vector& grad) const {
    const Eigen::Index n = x_.rows();
    const Eigen::Index v = x_.cols();
    const auto w = weights(params);

    // n x K logits, turned into probabilities in place.
    Matrix z = x_ * w.transpose();
    if (fit_intercept_) z.rowwise() += params.segment(k_ * v, k_).transpose();

    Scalar loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto row = z.row(i);
      const Scalar m = row.maxCoeff();
      const Scalar picked = row(labels_[static_cast<std::size_t>(i)]);
      row.array() = (row.array() - m).exp();
      const Scalar sum = row.sum();
      loss += std::log(sum) + m - picked;
      row /= sum;
      row(labels_[static_cast<std::size_t>(i)]) -= Scalar(1);
    }
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    loss = loss * inv_n + Scalar(0.5) * inv_c_ * inv_n * w.squaredNorm();

    grad.resize(parameter_count());
    Eigen::Map<Matrix> gw(grad.data(), k_, v);
    gw.noalias() = z.transpose() * x_;
    gw *= inv_n;
    gw += (inv_c_ * inv_n) * w;
    if (fit_intercept_) grad.segment(k_ * v, k_) = z.colwise().sum().transpose() * inv_n;
    return loss;
  }

 private:
  const Features& x_;
  std::span<const int> labels_;
  Eigen::Index k_;
  Scalar inv_c_;
  bool fit_intercept_;
};

}  // namespace automsc
