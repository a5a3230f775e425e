#include "rsrnm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rsrnm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEps = std::numeric_limits<double>::epsilon();

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Slope of the least-squares line through (x_i, y_i). Both coordinates are
// shifted by their first entry so that exactly constant data yields exactly 0.
double ls_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i] - x[0];
    my += y[i] - y[0];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = (x[i] - x[0]) - mx;
    const double dy = (y[i] - y[0]) - my;
    sxy += dx * dy;
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace

std::string_view to_string(AuditViolation::Kind kind) {
  switch (kind) {
    case AuditViolation::Kind::ascent_direction: return "ascent_direction";
    case AuditViolation::Kind::direction_norm_bound: return "direction_norm_bound";
    case AuditViolation::Kind::shift_certificate: return "shift_certificate";
    case AuditViolation::Kind::armijo: return "armijo";
    case AuditViolation::Kind::cholesky_retry: return "cholesky_retry";
  }
  return "unknown";
}

std::string_view to_string(RateClass c) {
  switch (c) {
    case RateClass::sublinear: return "sublinear";
    case RateClass::linear: return "linear";
    case RateClass::superlinear: return "superlinear";
  }
  return "unknown";
}

TheoryEstimates audit_trace(std::span<const IterationRecord> trace, const SolverConfig& cfg,
                            std::optional<double> final_f) {
  if (trace.empty()) throw std::invalid_argument("audit_trace: empty trace");
  TheoryEstimates est;
  est.iterations = trace.size();
  est.gram_norm_hat = kNaN;
  est.d_bound_margin_min = kNaN;
  est.t_min_observed = std::numeric_limits<double>::infinity();

  using Kind = AuditViolation::Kind;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const IterationRecord& r = trace[i];
    est.u_g_hat = std::max(est.u_g_hat, r.grad_norm);
    est.t_min_observed = std::min(est.t_min_observed, r.step);
    est.l_max_observed = std::max(est.l_max_observed, r.backtracks);
    est.cholesky_retries += r.cholesky_retries;
    if (r.cholesky_retries > 0) est.violations.push_back({Kind::cholesky_retry, r.k, 1.0});

    if (!(r.gtd < 0.0)) est.violations.push_back({Kind::ascent_direction, r.k, r.gtd});

    if (std::isfinite(r.gram_norm)) {
      est.gram_norm_hat =
          std::isnan(est.gram_norm_hat) ? r.gram_norm : std::max(est.gram_norm_hat, r.gram_norm);
      const double bound = r.gram_norm * std::pow(r.grad_norm, 1.0 - cfg.gamma) / cfg.c2;
      const double margin = bound - r.d_norm;
      est.d_bound_margin_min =
          std::isnan(est.d_bound_margin_min) ? margin : std::min(est.d_bound_margin_min, margin);
      if (margin < -1e-9 * bound) {
        est.violations.push_back({Kind::direction_norm_bound, r.k, -margin});
      }
    }

    if (std::isfinite(r.m_min_eig)) {
      const double floor = cfg.c2 * std::pow(r.grad_norm, cfg.gamma);
      if (r.m_min_eig < floor - 1e-9 * std::max(1.0, r.eta)) {
        est.violations.push_back({Kind::shift_certificate, r.k, floor - r.m_min_eig});
      }
    }

    const std::optional<double> f_next =
        i + 1 < trace.size() ? std::optional<double>(trace[i + 1].f) : final_f;
    if (f_next) {
      const double decrease = r.f - *f_next;
      const double required = -cfg.alpha * r.step * r.gtd;
      if (!(decrease >= required)) {
        est.violations.push_back({Kind::armijo, r.k, required - decrease});
      }
    }
  }

  std::vector<double> budgets;
  std::vector<double> best;
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    running = std::min(running, trace[i].grad_norm);
    budgets.push_back(std::log(static_cast<double>(i + 1)));
    best.push_back(std::log(running));
  }
  est.grad_decay_exponent = trace.size() >= 2 ? ls_slope(budgets, best) : kNaN;
  return est;
}

TheoryEstimates audit_run(const RunResult& result, const SolverConfig& cfg) {
  return audit_trace(result.trace, cfg, result.final_f);
}

double complexity_trend(std::span<const double> budgets, std::span<const double> min_grad) {
  if (budgets.size() != min_grad.size()) {
    throw std::invalid_argument("complexity_trend: budgets and values differ in length");
  }
  if (budgets.size() < 4) throw std::invalid_argument("complexity_trend: need >= 4 budgets");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0) || !(min_grad[i] > 0.0)) {
      throw std::invalid_argument("complexity_trend: budgets and values must be positive");
    }
    lx.push_back(std::log(budgets[i]));
    ly.push_back(std::log(min_grad[i]));
  }
  if (std::all_of(lx.begin(), lx.end(), [&](double v) { return v == lx[0]; })) {
    throw std::invalid_argument("complexity_trend: budgets are all equal");
  }
  return ls_slope(lx, ly);
}

std::vector<double> min_grad_at_budgets(std::span<const IterationRecord> trace,
                                        std::span<const double> budgets) {
  std::vector<double> out;
  out.reserve(budgets.size());
  for (double b : budgets) {
    const auto m = static_cast<std::size_t>(b);
    if (m < 1 || m > trace.size()) {
      throw std::invalid_argument("min_grad_at_budgets: budget outside the trace");
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) best = std::min(best, trace[k].grad_norm);
    out.push_back(best);
  }
  return out;
}

RateEstimate estimate_local_rate(std::span<const double> f_values, double f_star,
                                 std::size_t tail,
                                 const std::vector<Eigen::VectorXd>* iterates,
                                 const Eigen::VectorXd* x_star) {
  if (tail < 2) throw std::invalid_argument("estimate_local_rate: tail must be >= 2");
  if (tail > f_values.size()) {
    throw std::invalid_argument("estimate_local_rate: tail " + std::to_string(tail) +
                                " exceeds sequence length " +
                                std::to_string(f_values.size()));
  }
  const double floor = 64.0 * kEps * std::abs(f_star);
  const double f_min = *std::min_element(f_values.begin(), f_values.end());
  if (f_star - f_min > floor) {
    throw std::invalid_argument("estimate_local_rate: f_star lies above observed values");
  }
  const bool with_dist = iterates != nullptr && x_star != nullptr;
  if (with_dist && iterates->size() != f_values.size()) {
    throw std::invalid_argument("estimate_local_rate: iterates do not align with values");
  }

  RateEstimate est;
  est.tail_length = tail;
  std::vector<double> dist;
  const std::size_t begin = f_values.size() - tail;
  for (std::size_t k = begin; k + 1 < f_values.size(); ++k) {
    const double gap = f_values[k] - f_star;
    const double next_gap = f_values[k + 1] - f_star;
    if (!(gap > floor) || !(next_gap > floor)) break;
    est.ratios.push_back(next_gap / gap);
    if (with_dist) {
      const double dk = ((*iterates)[k] - *x_star).norm();
      const double dk1 = ((*iterates)[k + 1] - *x_star).norm();
      if (dk > 0.0) dist.push_back(dk1 / dk);
    }
  }
  if (est.ratios.empty()) {
    throw std::invalid_argument("estimate_local_rate: no gap ratio above the roundoff floor");
  }
  est.ratio_count = est.ratios.size();
  est.kappa_hat = median(est.ratios);
  est.kappa_max = *std::max_element(est.ratios.begin(), est.ratios.end());
  if (dist.empty()) {
    est.dist_ratio_min = kNaN;
    est.dist_ratio_median = kNaN;
  } else {
    est.dist_ratio_min = *std::min_element(dist.begin(), dist.end());
    est.dist_ratio_median = median(dist);
  }

  bool decreasing = true;
  for (std::size_t i = 1; i < est.ratios.size(); ++i) {
    if (!(est.ratios[i] < est.ratios[i - 1])) decreasing = false;
  }
  if (est.kappa_max < kSuperlinearKappaMax && decreasing) {
    est.classification = RateClass::superlinear;
  } else if (est.kappa_hat >= kLinearKappaLow && est.kappa_hat <= kLinearKappaHigh) {
    est.classification = RateClass::linear;
  } else {
    est.classification = RateClass::sublinear;
  }
  return est;
}

RateEstimate estimate_local_rate(const RunResult& result, double f_star, std::size_t tail,
                                 const std::optional<Eigen::VectorXd>& x_star) {
  std::vector<double> f;
  f.reserve(result.trace.size() + 1);
  for (const auto& r : result.trace) f.push_back(r.f);
  f.push_back(result.final_f);
  const bool with_dist = x_star && result.iterates.size() == f.size();
  return estimate_local_rate(f, f_star, tail, with_dist ? &result.iterates : nullptr,
                             with_dist ? &*x_star : nullptr);
}

SpectralSummary spectral_spot_check(const Objective& problem, const Eigen::VectorXd& x,
                                    std::size_t draws, Index s, std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("spectral_spot_check: draws must be >= 1");
  const Index n = problem.dim();
  const double scale = static_cast<double>(s) / static_cast<double>(n);
  std::vector<double> scaled;
  std::size_t positive = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const SketchMatrix p = SketchMatrix::sample(s, n, seed, i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(problem.sketched_hessian(x, p),
                                                       Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    const double lo = ev(0);
    const double hi = ev(ev.size() - 1);
    if (lo > 1e-12 * std::abs(hi)) ++positive;
    scaled.push_back(lo * scale);
  }
  SpectralSummary out;
  out.draws = draws;
  out.scaled_min = *std::min_element(scaled.begin(), scaled.end());
  out.scaled_max = *std::max_element(scaled.begin(), scaled.end());
  out.scaled_median = median(scaled);
  out.positivity_rate = static_cast<double>(positive) / static_cast<double>(draws);
  return out;
}

double reference_optimum(const Objective& problem, const Eigen::VectorXd& x0,
                         SolverConfig cfg, double grad_tol) {
  cfg.grad_tol = grad_tol;
  RunOptions opts;
  opts.audit = false;
  opts.shift_check_every = 0;
  const RunResult ref = run(problem, x0, SolverKind::rnm, cfg, opts);
  double best = ref.final_f;
  for (const auto& r : ref.trace) best = std::min(best, r.f);
  return best - 1e-12 * std::abs(best);
}

}  // namespace rsrnm
