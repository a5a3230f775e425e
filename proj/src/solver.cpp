#include "rsrnm/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace rsrnm {

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::rs_rnm: return "rs_rnm";
    case SolverKind::rnm: return "rnm";
    case SolverKind::gd: return "gd";
  }
  return "unknown";
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iter: return "max_iter";
    case RunStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "rs_rnm") return SolverKind::rs_rnm;
  if (name == "rnm") return SolverKind::rnm;
  if (name == "gd") return SolverKind::gd;
  throw std::invalid_argument("unknown solver '" + std::string(name) +
                              "' (expected rs_rnm, rnm or gd)");
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(c1 > 1.0)) fail("c1 must be > 1");
  if (!(c2 > 0.0)) fail("c2 must be > 0");
  if (!(gamma >= 0.0)) fail("gamma must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0,1)");
  if (s < 1) fail("s must be >= 1");
  if (!(grad_tol > 0.0)) fail("grad_tol must be > 0");
  if (max_iter < 1) fail("max_iter must be >= 1");
  if (max_backtracks < 1) fail("max_backtracks must be >= 1");
}

RegularizedSketch regularize_sketched(const Eigen::MatrixXd& h_s, double grad_norm,
                                      const SolverConfig& cfg) {
  if (h_s.rows() != h_s.cols() || h_s.rows() < 1) {
    throw std::invalid_argument("regularize_sketched: matrix must be square");
  }
  if (!(grad_norm > 0.0)) {
    throw std::invalid_argument("regularize_sketched: grad_norm must be > 0");
  }
  RegularizedSketch out;
  out.m = 0.5 * (h_s + h_s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigensolver failed on the (sketched) Hessian");
  }
  out.lambda_shift = std::max(0.0, -eig.eigenvalues()(0));
  out.eta = cfg.c1 * out.lambda_shift + cfg.c2 * std::pow(grad_norm, cfg.gamma);
  out.m.diagonal().array() += out.eta;
  return out;
}

namespace {

struct RegularizedSolve {
  Eigen::VectorXd u;
  RegularizedSketch reg;
  int retries = 0;
};

// Solves (H + eta I) u = rhs by Cholesky. One retry with a diagonal nudge of
// 10 eps trace(M) / dim covers M that is semidefinite only to roundoff.
RegularizedSolve regularized_solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& rhs,
                                   double grad_norm, const SolverConfig& cfg) {
  RegularizedSolve out;
  out.reg = regularize_sketched(h, grad_norm, cfg);
  Eigen::LLT<Eigen::MatrixXd> llt(out.reg.m);
  if (llt.info() != Eigen::Success) {
    const double nudge = 10.0 * std::numeric_limits<double>::epsilon() *
                         out.reg.m.trace() / static_cast<double>(out.reg.m.rows());
    Eigen::MatrixXd nudged = out.reg.m;
    nudged.diagonal().array() += nudge;
    llt.compute(nudged);
    out.retries = 1;
    if (llt.info() != Eigen::Success) {
      throw NumericalError("Cholesky of the regularized Hessian failed (eta = " +
                           std::to_string(out.reg.eta) + ")");
    }
    out.reg.m = std::move(nudged);
  }
  out.u = llt.solve(rhs);
  return out;
}

Direction finish(Eigen::VectorXd d, const Eigen::VectorXd& g, RegularizedSolve&& solve) {
  Direction out;
  out.gtd = g.dot(d);
  out.d = std::move(d);
  out.lambda_shift = solve.reg.lambda_shift;
  out.eta = solve.reg.eta;
  out.cholesky_retries = solve.retries;
  out.m = std::move(solve.reg.m);
  return out;
}

}  // namespace

Direction rs_rnm_direction(const Objective& problem, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& g, const SketchMatrix& p,
                           const SolverConfig& cfg) {
  if (p.cols() != problem.dim() || g.size() != problem.dim()) {
    throw std::invalid_argument("rs_rnm_direction: dimension mismatch");
  }
  const Eigen::MatrixXd h_s = problem.sketched_hessian(x, p);
  RegularizedSolve solve = regularized_solve(h_s, -p.apply(g), g.norm(), cfg);
  Eigen::VectorXd d = p.apply_transpose(solve.u);
  return finish(std::move(d), g, std::move(solve));
}

Direction rs_rnm_direction(const Objective& problem, const Eigen::VectorXd& x,
                           const SketchMatrix& p, const SolverConfig& cfg) {
  return rs_rnm_direction(problem, x, problem.gradient(x), p, cfg);
}

Direction rnm_direction(const Objective& problem, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& g, const SolverConfig& cfg) {
  if (g.size() != problem.dim()) {
    throw std::invalid_argument("rnm_direction: dimension mismatch");
  }
  const Eigen::MatrixXd h = problem.hessian(x);
  RegularizedSolve solve = regularized_solve(h, -g, g.norm(), cfg);
  Eigen::VectorXd d = solve.u;
  return finish(std::move(d), g, std::move(solve));
}

Direction rnm_direction(const Objective& problem, const Eigen::VectorXd& x,
                        const SolverConfig& cfg) {
  return rnm_direction(problem, x, problem.gradient(x), cfg);
}

Eigen::VectorXd gd_direction(const Objective& problem, const Eigen::VectorXd& x) {
  return -problem.gradient(x);
}

LineSearchResult armijo_backtrack(const Objective& problem, const Eigen::VectorXd& x,
                                  double fx, const Eigen::VectorXd& d, double gtd,
                                  const SolverConfig& cfg) {
  if (!(gtd < 0.0)) {
    throw std::invalid_argument("armijo_backtrack: direction is not a descent direction");
  }
  LineSearchResult out;
  double t = 1.0;
  for (int l = 0; l <= cfg.max_backtracks; ++l, t *= cfg.beta) {
    const double f_new = problem.value(x + t * d);
    if (fx - f_new >= -cfg.alpha * t * gtd) {
      out.step = t;
      out.backtracks = l;
      out.f_new = f_new;
      out.success = true;
      return out;
    }
  }
  out.backtracks = cfg.max_backtracks + 1;
  return out;
}

RunResult run(const Objective& problem, const Eigen::VectorXd& x0, SolverKind kind,
              const SolverConfig& cfg, const RunOptions& options) {
  cfg.validate();
  if (x0.size() != problem.dim()) {
    throw std::invalid_argument("run: x0 has length " + std::to_string(x0.size()) +
                                ", expected " + std::to_string(problem.dim()));
  }
  if (!x0.allFinite()) throw std::invalid_argument("run: x0 must be finite");
  if (kind == SolverKind::rnm && !problem.has_dense_hessian()) {
    throw CapabilityError("rnm requires a dense Hessian");
  }

  using Clock = std::chrono::steady_clock;
  const auto run_start = Clock::now();
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  RunResult result;
  result.solver_kind = kind;
  Eigen::VectorXd x = x0;
  double fx = problem.value(x);
  if (options.keep_iterates) result.iterates.push_back(x);

  double grad_norm = 0.0;
  for (int k = 0;; ++k) {
    const auto iter_start = Clock::now();
    const Eigen::VectorXd g = problem.gradient(x);
    grad_norm = g.norm();
    if (!std::isfinite(fx) || !std::isfinite(grad_norm)) {
      throw NumericalError("non-finite objective or gradient at iteration " +
                           std::to_string(k));
    }
    if (grad_norm < cfg.grad_tol) {
      result.status = RunStatus::converged;
      break;
    }
    if (k >= cfg.max_iter) {
      result.status = RunStatus::max_iter;
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.f = fx;
    rec.grad_norm = grad_norm;
    rec.m_min_eig = kNaN;

    Direction dir;
    switch (kind) {
      case SolverKind::rs_rnm: {
        const SketchMatrix p = options.identity_sketch
                                   ? SketchMatrix::identity(problem.dim())
                                   : SketchMatrix::sample(cfg.s, problem.dim(), cfg.seed,
                                                          static_cast<std::uint64_t>(k));
        dir = rs_rnm_direction(problem, x, g, p, cfg);
        if (p.is_identity()) {
          rec.gram_norm = 1.0;
        } else {
          rec.gram_norm = options.audit ? p.gram_norm() : kNaN;
        }
        break;
      }
      case SolverKind::rnm:
        dir = rnm_direction(problem, x, g, cfg);
        rec.gram_norm = 1.0;
        break;
      case SolverKind::gd:
        dir.d = gd_direction(problem, x);
        dir.gtd = g.dot(dir.d);
        rec.gram_norm = kNaN;
        break;
    }
    if (kind != SolverKind::gd && options.shift_check_every > 0 &&
        k % options.shift_check_every == 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dir.m, Eigen::EigenvaluesOnly);
      rec.m_min_eig = eig.eigenvalues()(0);
    }
    rec.lambda_shift = dir.lambda_shift;
    rec.eta = dir.eta;
    rec.gtd = dir.gtd;
    rec.mu_sq = -dir.gtd;
    rec.d_norm = dir.d.norm();
    rec.cholesky_retries = dir.cholesky_retries;

    if (!(dir.gtd < 0.0)) {
      result.status = RunStatus::line_search_failed;
      break;
    }
    const LineSearchResult ls = armijo_backtrack(problem, x, fx, dir.d, dir.gtd, cfg);
    if (!ls.success) {
      result.status = RunStatus::line_search_failed;
      break;
    }
    rec.step = ls.step;
    rec.backtracks = ls.backtracks;
    x += ls.step * dir.d;
    fx = ls.f_new;
    rec.elapsed_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - iter_start).count();
    result.trace.push_back(rec);
    if (options.keep_iterates) result.iterates.push_back(x);
  }

  result.final_x = std::move(x);
  result.final_f = fx;
  result.final_grad_norm = grad_norm;
  result.total_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  return result;
}

}  // namespace rsrnm
