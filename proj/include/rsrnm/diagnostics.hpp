#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsrnm/objective.hpp"
#include "rsrnm/solver.hpp"

namespace rsrnm {

struct AuditViolation {
  enum class Kind {
    ascent_direction,     // gtd >= 0
    direction_norm_bound, // ||d|| > ||P^T P|| ||g||^{1-gamma} / c2
    shift_certificate,    // lambda_min(M) < c2 ||g||^gamma
    armijo,               // f_k - f_{k+1} < -alpha t gtd
    cholesky_retry,       // M needed the diagonal nudge
  };
  Kind kind;
  int k;
  double amount;  // size of the violation, in the units of the checked quantity
};

std::string_view to_string(AuditViolation::Kind kind);

/// Empirical stand-ins for the constants of the global complexity analysis.
struct TheoryEstimates {
  std::size_t iterations = 0;
  double u_g_hat = 0.0;             // max ||g_k||
  double gram_norm_hat = 0.0;       // max ||P_k^T P_k||; NaN when not applicable
  double d_bound_margin_min = 0.0;  // min_k (bound_k - ||d_k||); NaN for GD
  double t_min_observed = 0.0;
  int l_max_observed = 0;
  double grad_decay_exponent = 0.0;  // slope of log min_{j<=k}||g_j|| vs log k
  int cholesky_retries = 0;
  std::vector<AuditViolation> violations;
};

/// Audits a trace against the deterministic guarantees of the method:
/// descent, the direction-norm bound, the shift certificate (where M_k was
/// spot-checked), and Armijo sufficient decrease between consecutive records.
/// Sketch-based checks are skipped for records without a finite gram_norm.
/// `final_f`, when given, is f(x_K) and extends the Armijo check to the last step.
/// Throws std::invalid_argument on an empty trace.
TheoryEstimates audit_trace(std::span<const IterationRecord> trace, const SolverConfig& cfg,
                            std::optional<double> final_f = std::nullopt);
TheoryEstimates audit_run(const RunResult& result, const SolverConfig& cfg);

/// Least-squares slope of log(min_grad) against log(budget).
/// Needs >= 4 points, positive values, and at least two distinct budgets.
double complexity_trend(std::span<const double> budgets, std::span<const double> min_grad);

/// min_{k < m} ||g_k|| for each budget m, read from one trace.
std::vector<double> min_grad_at_budgets(std::span<const IterationRecord> trace,
                                        std::span<const double> budgets);

enum class RateClass { sublinear, linear, superlinear };
std::string_view to_string(RateClass c);

/// Thresholds used to label a tail of ratios; they are conventions of this
/// library rather than constants from the convergence theory.
inline constexpr double kSuperlinearKappaMax = 0.1;
inline constexpr double kLinearKappaLow = 0.1;
inline constexpr double kLinearKappaHigh = 0.99;

struct RateEstimate {
  std::size_t tail_length = 0;
  std::size_t ratio_count = 0;
  double kappa_hat = 0.0;       // median of (f_{k+1}-f*)/(f_k-f*)
  double kappa_max = 0.0;
  double dist_ratio_min = 0.0;  // NaN without iterates / x_star
  double dist_ratio_median = 0.0;
  RateClass classification = RateClass::sublinear;
  std::vector<double> ratios;
};

/// Ratios of consecutive optimality gaps over the last `tail` values of
/// `f_values`, taken only while both gaps exceed 64 eps |f_star|.
/// `iterates`, when given, must align with `f_values`.
/// Throws std::invalid_argument when tail < 2, tail exceeds the sequence,
/// f_star exceeds the smallest value, or no ratio survives the floor.
RateEstimate estimate_local_rate(std::span<const double> f_values, double f_star,
                                 std::size_t tail,
                                 const std::vector<Eigen::VectorXd>* iterates = nullptr,
                                 const Eigen::VectorXd* x_star = nullptr);

/// Same, with f_values = (trace f..., final_f) and the run's stored iterates.
RateEstimate estimate_local_rate(const RunResult& result, double f_star, std::size_t tail,
                                 const std::optional<Eigen::VectorXd>& x_star = std::nullopt);

struct SpectralSummary {
  std::size_t draws = 0;
  double scaled_min = 0.0;     // min over draws of lambda_min(P H P^T) * s / n
  double scaled_median = 0.0;
  double scaled_max = 0.0;
  double positivity_rate = 0.0;
};

/// Distribution of lambda_min(P H(x) P^T) * (s/n) over fresh Gaussian draws.
/// A draw counts as positive when lambda_min > 1e-12 lambda_max.
SpectralSummary spectral_spot_check(const Objective& problem, const Eigen::VectorXd& x,
                                    std::size_t draws, Index s, std::uint64_t seed);

/// Best objective value from a high-accuracy RNM reference run, lowered by a
/// relative floor of 1e-12. Stand-in for f* when the optimum is unknown.
double reference_optimum(const Objective& problem, const Eigen::VectorXd& x0,
                         SolverConfig cfg, double grad_tol = 1e-10);

}  // namespace rsrnm
