#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "rsrnm/dataset.hpp"
#include "rsrnm/loss.hpp"
#include "rsrnm/sketch.hpp"

namespace rsrnm {

/// Raised when an evaluation the objective does not support is requested.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Twice-differentiable objective f: R^n -> R.
///
/// Implementations are immutable after construction; every evaluation is a
/// pure function of its arguments and safe for concurrent callers.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual bool has_dense_hessian() const { return false; }
  /// True when sketched_hessian avoids forming the n x n Hessian.
  virtual bool has_sketched_hessian() const { return false; }

  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;

  /// Dense symmetric Hessian. Throws CapabilityError when unsupported.
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

  /// P H(x) P^T as an exactly symmetric s x s matrix. The default forms the
  /// dense Hessian; with the identity sketch it returns hessian(x) unchanged.
  virtual Eigen::MatrixXd sketched_hessian(const Eigen::VectorXd& x,
                                           const SketchMatrix& p) const;

 protected:
  void check_dim(const Eigen::VectorXd& x, const char* what) const;
};

/// f(w) = (1/m) sum_i l(y_i - x_i^T w) + lambda ||w||^2.
class RobustRegression final : public Objective {
 public:
  RobustRegression(Dataset data, LossKind loss, double lambda);

  Index dim() const override { return data_.X.cols(); }
  Index samples() const { return data_.X.rows(); }
  bool has_dense_hessian() const override { return true; }
  bool has_sketched_hessian() const override { return true; }

  double value(const Eigen::VectorXd& w) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& w) const override;

  /// (1/m) S^T diag(l''(r)) S + 2 lambda P P^T with S = X P^T.
  /// Costs O(mns + ms^2) and never forms the n x n Hessian.
  Eigen::MatrixXd sketched_hessian(const Eigen::VectorXd& w,
                                   const SketchMatrix& p) const override;

  /// r = y - X w.
  Eigen::VectorXd residuals(const Eigen::VectorXd& w) const;

  /// (1/m)||X||_2^2 + 2 lambda, an upper bound on ||H(w)||_2 since |l''| <= 1.
  double hessian_norm_bound() const;

  const Dataset& data() const { return data_; }
  LossKind loss() const { return loss_; }
  double lambda() const { return lambda_; }

 private:
  Dataset data_;
  LossKind loss_;
  double lambda_;
};

/// f(x) = 1/2 x^T A x - b^T x with constant Hessian A.
class QuadraticProblem final : public Objective {
 public:
  /// A is symmetrized; throws std::invalid_argument on shape mismatch.
  QuadraticProblem(Eigen::MatrixXd a, Eigen::VectorXd b,
                   std::optional<Eigen::VectorXd> minimizer = std::nullopt);

  /// A = Q diag(eigenvalues) Q^T with Q a seeded Haar-random orthogonal
  /// matrix, and b = A x_star so that x_star is the stationary point.
  static QuadraticProblem with_spectrum(const Eigen::VectorXd& eigenvalues,
                                        const Eigen::VectorXd& x_star,
                                        std::uint64_t seed);

  Index dim() const override { return a_.rows(); }
  bool has_dense_hessian() const override { return true; }

  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;

  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  const std::optional<Eigen::VectorXd>& minimizer() const { return minimizer_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  std::optional<Eigen::VectorXd> minimizer_;
};

}  // namespace rsrnm
