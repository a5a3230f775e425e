#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rsrnm/objective.hpp"
#include "rsrnm/sketch.hpp"

namespace rsrnm {

enum class SolverKind { rs_rnm, rnm, gd };
enum class RunStatus { converged, max_iter, line_search_failed };

std::string_view to_string(SolverKind kind);
std::string_view to_string(RunStatus status);
/// Throws std::invalid_argument for names outside {rs_rnm, rnm, gd}.
SolverKind parse_solver_kind(std::string_view name);

/// Raised when M_k cannot be Cholesky-factored even after the diagonal nudge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters of the regularized Newton family. Defaults are the values used
/// for the robust-regression benchmarks. RNM reads the same c1, c2, gamma.
struct SolverConfig {
  double c1 = 2.0;
  double c2 = 1.0;
  double gamma = 0.5;
  double alpha = 0.3;
  double beta = 0.5;
  Index s = 100;
  double grad_tol = 1e-7;
  int max_iter = 10000;
  int max_backtracks = 60;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

/// One accepted step x_k -> x_{k+1}. GD leaves lambda_shift and eta at 0.
struct IterationRecord {
  int k = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double lambda_shift = 0.0;
  double eta = 0.0;
  double step = 0.0;
  int backtracks = 0;
  double gtd = 0.0;
  double d_norm = 0.0;
  double mu_sq = 0.0;
  double elapsed_ms = 0.0;
  /// ||P_k^T P_k|| for RS-RNM when auditing (1 for RNM, NaN for GD).
  double gram_norm = 0.0;
  /// Independent eigensolve of lambda_min(M_k); NaN unless spot-checked.
  double m_min_eig = 0.0;
  /// Number of diagonal nudges needed before Cholesky succeeded.
  int cholesky_retries = 0;
};

struct RunResult {
  std::vector<IterationRecord> trace;
  Eigen::VectorXd final_x;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  RunStatus status = RunStatus::max_iter;
  double total_seconds = 0.0;
  SolverKind solver_kind = SolverKind::rs_rnm;
  /// x_0, ..., x_K when RunOptions::keep_iterates is set.
  std::vector<Eigen::VectorXd> iterates;
};

struct RunOptions {
  /// RS-RNM only: use P_k = I_n instead of Gaussian draws.
  bool identity_sketch = false;
  bool keep_iterates = false;
  /// Record ||P_k^T P_k|| every iteration.
  bool audit = true;
  /// Eigensolve M_k on every n-th iteration for the shift certificate; 0 disables.
  int shift_check_every = 10;
};

struct RegularizedSketch {
  Eigen::MatrixXd m;
  double lambda_shift = 0.0;
  double eta = 0.0;
};

/// M = H_s + eta I with Lambda = max(0, -lambda_min(H_s)) and
/// eta = c1 Lambda + c2 grad_norm^gamma. H_s is symmetrized first.
RegularizedSketch regularize_sketched(const Eigen::MatrixXd& h_s, double grad_norm,
                                      const SolverConfig& cfg);

struct Direction {
  Eigen::VectorXd d;
  double lambda_shift = 0.0;
  double eta = 0.0;
  double gtd = 0.0;
  int cholesky_retries = 0;
  Eigen::MatrixXd m;  // regularized (sketched) Hessian, kept for audits
};

/// d = -P^T M^{-1} P g with M from regularize_sketched(P H P^T).
Direction rs_rnm_direction(const Objective& problem, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& g, const SketchMatrix& p,
                           const SolverConfig& cfg);
Direction rs_rnm_direction(const Objective& problem, const Eigen::VectorXd& x,
                           const SketchMatrix& p, const SolverConfig& cfg);

/// d = -(H + c1 Lambda I + c2 ||g||^gamma I)^{-1} g in the full space.
Direction rnm_direction(const Objective& problem, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& g, const SolverConfig& cfg);
Direction rnm_direction(const Objective& problem, const Eigen::VectorXd& x,
                        const SolverConfig& cfg);

Eigen::VectorXd gd_direction(const Objective& problem, const Eigen::VectorXd& x);

struct LineSearchResult {
  double step = 0.0;
  int backtracks = 0;
  double f_new = 0.0;
  bool success = false;
};

/// Smallest l in [0, max_backtracks] with
///   f(x) - f(x + beta^l d) >= -alpha beta^l gtd.
/// `fx` must equal f(x). Throws std::invalid_argument unless gtd < 0.
LineSearchResult armijo_backtrack(const Objective& problem, const Eigen::VectorXd& x,
                                  double fx, const Eigen::VectorXd& d, double gtd,
                                  const SolverConfig& cfg);

/// Runs one solver from x0 until ||g|| < grad_tol, max_iter steps, or a
/// line-search failure. RS-RNM draws P_k with (cfg.seed, draw_index = k).
RunResult run(const Objective& problem, const Eigen::VectorXd& x0, SolverKind kind,
              const SolverConfig& cfg, const RunOptions& options = {});

}  // namespace rsrnm
