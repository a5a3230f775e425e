#include "rsrnm/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rsrnm/rng.hpp"

namespace rsrnm {

SketchMatrix::SketchMatrix(Eigen::MatrixXd entries, std::uint64_t seed,
                           std::uint64_t draw_index, bool random, bool identity)
    : entries_(std::move(entries)),
      seed_(seed),
      draw_index_(draw_index),
      random_(random),
      identity_(identity) {}

SketchMatrix SketchMatrix::sample(Index s, Index n, std::uint64_t seed,
                                  std::uint64_t draw_index) {
  if (s < 1 || n < 1) {
    throw std::invalid_argument("sketch dimensions must be positive, got " +
                                std::to_string(s) + "x" + std::to_string(n));
  }
  Rng rng = Rng(seed).split(draw_index);
  const double scale = 1.0 / std::sqrt(static_cast<double>(s));
  Eigen::MatrixXd p(s, n);
  for (Index i = 0; i < s; ++i) {
    for (Index j = 0; j < n; ++j) {
      p(i, j) = scale * rng.normal();
    }
  }
  return SketchMatrix(std::move(p), seed, draw_index, true, false);
}

SketchMatrix SketchMatrix::identity(Index n) {
  if (n < 1) {
    throw std::invalid_argument("identity sketch needs n >= 1");
  }
  return SketchMatrix(Eigen::MatrixXd::Identity(n, n), 0, 0, false, true);
}

SketchMatrix SketchMatrix::from_matrix(Eigen::MatrixXd entries) {
  if (entries.rows() < 1 || entries.cols() < 1) {
    throw std::invalid_argument("sketch dimensions must be positive");
  }
  return SketchMatrix(std::move(entries), 0, 0, false, false);
}

Eigen::VectorXd SketchMatrix::apply(const Eigen::VectorXd& v) const {
  if (v.size() != cols()) {
    throw std::invalid_argument("apply: vector length " +
                                std::to_string(v.size()) + " != sketch cols " +
                                std::to_string(cols()));
  }
  if (identity_) return v;
  return entries_ * v;
}

Eigen::VectorXd SketchMatrix::apply_transpose(const Eigen::VectorXd& u) const {
  if (u.size() != rows()) {
    throw std::invalid_argument("apply_transpose: vector length " +
                                std::to_string(u.size()) +
                                " != sketch rows " + std::to_string(rows()));
  }
  if (identity_) return u;
  return entries_.transpose() * u;
}

Eigen::MatrixXd SketchMatrix::gram() const {
  if (identity_) return Eigen::MatrixXd::Identity(rows(), rows());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(rows(), rows());
  g.selfadjointView<Eigen::Lower>().rankUpdate(entries_);
  return g.selfadjointView<Eigen::Lower>();
}

double SketchMatrix::gram_norm() const {
  return singular_value_band(*this).gram_max;
}

SingularValueBand singular_value_band(const SketchMatrix& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.gram(),
                                                     Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  SingularValueBand band;
  band.gram_min = ev(0);
  band.gram_max = ev(ev.size() - 1);
  // P^T is n x s; with s > n it has s - n structural zero singular values.
  band.sigma_min =
      p.rows() > p.cols() ? 0.0 : std::sqrt(std::max(0.0, band.gram_min));
  band.sigma_max = std::sqrt(std::max(0.0, band.gram_max));
  return band;
}

namespace {

struct TrialStats {
  std::size_t jl_hits = 0;
  double gram_max = 0.0;
  double gram_sum = 0.0;
  double sigma_min = std::numeric_limits<double>::infinity();
  double sigma_max = 0.0;
};

}  // namespace

ConcentrationReport concentration_study(
    Index s, Index n, std::size_t trials, double jl_epsilon, std::uint64_t seed,
    const std::optional<Eigen::VectorXd>& test_vector, unsigned threads) {
  if (s < 1 || n < 1) {
    throw std::invalid_argument("concentration_study: dimensions must be positive");
  }
  if (trials < 1) {
    throw std::invalid_argument("concentration_study: trials must be >= 1");
  }
  if (!(jl_epsilon > 0.0 && jl_epsilon < 1.0)) {
    throw std::invalid_argument("concentration_study: jl_epsilon must lie in (0,1)");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Unit(n, 0);
  if (test_vector) {
    if (test_vector->size() != n || test_vector->norm() == 0.0) {
      throw std::invalid_argument("concentration_study: bad test vector");
    }
    x = test_vector->normalized();
  }

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  std::vector<TrialStats> partial(threads);
  std::vector<double> gram_norms(trials);

  auto worker = [&](unsigned w) {
    TrialStats& st = partial[w];
    for (std::size_t t = w; t < trials; t += threads) {
      const SketchMatrix p = SketchMatrix::sample(s, n, seed, t);
      const double ratio = p.apply(x).squaredNorm();
      if (ratio >= 1.0 - jl_epsilon && ratio <= 1.0 + jl_epsilon) ++st.jl_hits;
      const SingularValueBand band = singular_value_band(p);
      gram_norms[t] = band.gram_max;
      st.gram_max = std::max(st.gram_max, band.gram_max);
      st.sigma_min = std::min(st.sigma_min, band.sigma_min);
      st.sigma_max = std::max(st.sigma_max, band.sigma_max);
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  ConcentrationReport report;
  report.s = s;
  report.n = n;
  report.trials = trials;
  report.jl_epsilon = jl_epsilon;
  report.sigma_min_min = std::numeric_limits<double>::infinity();
  std::size_t hits = 0;
  for (const TrialStats& st : partial) {
    hits += st.jl_hits;
    report.gram_norm_max = std::max(report.gram_norm_max, st.gram_max);
    report.sigma_min_min = std::min(report.sigma_min_min, st.sigma_min);
    report.sigma_max_max = std::max(report.sigma_max_max, st.sigma_max);
  }
  // Summed in trial order so the mean is independent of the thread count.
  double sum = 0.0;
  for (double g : gram_norms) sum += g;
  report.gram_norm_mean = sum / static_cast<double>(trials);
  report.jl_success_fraction =
      static_cast<double>(hits) / static_cast<double>(trials);
  return report;
}

}  // namespace rsrnm
