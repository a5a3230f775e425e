#include "rsrnm/objective.hpp"

#include <cmath>
#include <string>

#include "rsrnm/rng.hpp"

namespace rsrnm {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

void Objective::check_dim(const Eigen::VectorXd& x, const char* what) const {
  if (x.size() != dim()) {
    throw std::invalid_argument(std::string(what) + ": point has length " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(dim()));
  }
}

Eigen::MatrixXd Objective::hessian(const Eigen::VectorXd&) const {
  throw CapabilityError("objective does not provide a dense Hessian");
}

Eigen::MatrixXd Objective::sketched_hessian(const Eigen::VectorXd& x,
                                            const SketchMatrix& p) const {
  if (p.cols() != dim()) {
    throw std::invalid_argument("sketched_hessian: sketch has " +
                                std::to_string(p.cols()) + " columns, expected " +
                                std::to_string(dim()));
  }
  if (p.is_identity()) return hessian(x);
  const Eigen::MatrixXd& pm = p.entries();
  return symmetrized(pm * hessian(x) * pm.transpose());
}

RobustRegression::RobustRegression(Dataset data, LossKind loss, double lambda)
    : data_(std::move(data)), loss_(loss), lambda_(lambda) {
  if (data_.X.rows() != data_.y.size()) {
    throw std::invalid_argument("RobustRegression: X has " +
                                std::to_string(data_.X.rows()) + " rows but y has " +
                                std::to_string(data_.y.size()) + " entries");
  }
  if (data_.X.rows() < 1 || data_.X.cols() < 1) {
    throw std::invalid_argument("RobustRegression: empty design matrix");
  }
  if (!(lambda_ >= 0.0)) {
    throw std::invalid_argument("RobustRegression: lambda must be non-negative");
  }
}

Eigen::VectorXd RobustRegression::residuals(const Eigen::VectorXd& w) const {
  check_dim(w, "residuals");
  return data_.y - data_.X * w;
}

double RobustRegression::value(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd r = residuals(w);
  double sum = 0.0;
  for (Index i = 0; i < r.size(); ++i) sum += loss_eval(loss_, r(i)).value;
  return sum / static_cast<double>(samples()) + lambda_ * w.squaredNorm();
}

Eigen::VectorXd RobustRegression::gradient(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd r = residuals(w);
  Eigen::VectorXd d1(r.size());
  for (Index i = 0; i < r.size(); ++i) d1(i) = loss_eval(loss_, r(i)).d1;
  const double inv_m = 1.0 / static_cast<double>(samples());
  return -inv_m * (data_.X.transpose() * d1) + 2.0 * lambda_ * w;
}

Eigen::MatrixXd RobustRegression::hessian(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd r = residuals(w);
  Eigen::VectorXd d2(r.size());
  for (Index i = 0; i < r.size(); ++i) d2(i) = loss_eval(loss_, r(i)).d2;
  const double inv_m = 1.0 / static_cast<double>(samples());
  Eigen::MatrixXd h = inv_m * (data_.X.transpose() * (d2.asDiagonal() * data_.X));
  h.diagonal().array() += 2.0 * lambda_;
  return symmetrized(h);
}

Eigen::MatrixXd RobustRegression::sketched_hessian(const Eigen::VectorXd& w,
                                                   const SketchMatrix& p) const {
  if (p.cols() != dim()) {
    throw std::invalid_argument("sketched_hessian: sketch has " +
                                std::to_string(p.cols()) + " columns, expected " +
                                std::to_string(dim()));
  }
  if (p.is_identity()) return hessian(w);
  const Eigen::VectorXd r = residuals(w);
  Eigen::VectorXd d2(r.size());
  for (Index i = 0; i < r.size(); ++i) d2(i) = loss_eval(loss_, r(i)).d2;
  const double inv_m = 1.0 / static_cast<double>(samples());
  const Eigen::MatrixXd s = data_.X * p.entries().transpose();
  Eigen::MatrixXd h = inv_m * (s.transpose() * (d2.asDiagonal() * s));
  h.noalias() += (2.0 * lambda_) * p.gram();
  return symmetrized(h);
}

double RobustRegression::hessian_norm_bound() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      data_.X.rows() <= data_.X.cols()
          ? Eigen::MatrixXd(data_.X * data_.X.transpose())
          : Eigen::MatrixXd(data_.X.transpose() * data_.X),
      Eigen::EigenvaluesOnly);
  const double x_norm_sq = eig.eigenvalues().maxCoeff();
  return x_norm_sq / static_cast<double>(samples()) + 2.0 * lambda_;
}

QuadraticProblem::QuadraticProblem(Eigen::MatrixXd a, Eigen::VectorXd b,
                                   std::optional<Eigen::VectorXd> minimizer)
    : a_(symmetrized(a)), b_(std::move(b)), minimizer_(std::move(minimizer)) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size() || a_.rows() < 1) {
    throw std::invalid_argument("QuadraticProblem: A must be n x n and b length n");
  }
  if (minimizer_ && minimizer_->size() != b_.size()) {
    throw std::invalid_argument("QuadraticProblem: minimizer has wrong length");
  }
}

QuadraticProblem QuadraticProblem::with_spectrum(const Eigen::VectorXd& eigenvalues,
                                                 const Eigen::VectorXd& x_star,
                                                 std::uint64_t seed) {
  const Index n = eigenvalues.size();
  if (x_star.size() != n) {
    throw std::invalid_argument("with_spectrum: x_star has wrong length");
  }
  Rng rng(seed);
  Eigen::MatrixXd g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix on R's diagonal makes Q Haar distributed.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  Eigen::MatrixXd a = q * eigenvalues.asDiagonal() * q.transpose();
  a = symmetrized(a);
  Eigen::VectorXd b = a * x_star;
  return QuadraticProblem(std::move(a), std::move(b), x_star);
}

double QuadraticProblem::value(const Eigen::VectorXd& x) const {
  check_dim(x, "value");
  return 0.5 * x.dot(a_ * x) - b_.dot(x);
}

Eigen::VectorXd QuadraticProblem::gradient(const Eigen::VectorXd& x) const {
  check_dim(x, "gradient");
  return a_ * x - b_;
}

Eigen::MatrixXd QuadraticProblem::hessian(const Eigen::VectorXd& x) const {
  check_dim(x, "hessian");
  return a_;
}

}  // namespace rsrnm
