#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rsrnm/dataset.hpp"
#include "rsrnm/loss.hpp"
#include "rsrnm/solver.hpp"

namespace rsrnm::harness {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidArgs = 1,
  kExitIoError = 2,
  kExitMaxIter = 3,
  kExitLineSearchFailed = 4,
};

int exit_code_for(RunStatus status);

/// Raised for configuration problems; maps to kExitInvalidArgs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for unreadable/unwritable files; maps to kExitIoError.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverEntry {
  SolverKind kind = SolverKind::rs_rnm;
  std::string label;  // unique within a RunSpec; defaults from kind and s
  SolverConfig cfg;
};

enum class X0Policy { zeros, random };

struct RunSpec {
  std::variant<std::filesystem::path, SyntheticParams> problem = SyntheticParams{};
  LossKind loss = LossKind::geman_mcclure;
  double lambda = 0.01;
  X0Policy x0 = X0Policy::zeros;
  std::uint64_t x0_seed = 0;
  std::vector<SolverEntry> solvers;
  std::optional<std::filesystem::path> trace_out;
  std::optional<std::filesystem::path> summary_out;
  std::optional<std::filesystem::path> combined_out;
};

/// Parses a RunSpec JSON document. Unknown keys, unknown solver names and
/// invalid solver parameters raise ConfigError.
RunSpec parse_run_spec(const std::string& json_text);
RunSpec load_run_spec(const std::filesystem::path& path);

/// Default label: "rs_rnm_s<s>" for RS-RNM, otherwise the solver name.
std::string default_label(SolverKind kind, const SolverConfig& cfg);

/// Resolves the problem source. A CSV path must exist.
Dataset materialize_dataset(const RunSpec& spec);
Eigen::VectorXd initial_point(const RunSpec& spec, Eigen::Index n);

/// Header of the per-run trace CSV, in column order.
inline constexpr const char* kTraceHeader =
    "k,f,grad_norm,lambda_shift,eta,step,backtracks,gtd,d_norm,mu_sq,elapsed_ms";

/// One row per accepted step, then a terminal row for x_K with the step
/// columns set to 0.
void write_trace_csv(const RunResult& result, std::ostream& out);

/// Long-format rows "solver,k,f,grad_norm,elapsed_ms_cumulative".
void write_combined_rows(const std::string& label, const RunResult& result,
                         std::ostream& out);

/// Entry point of the command-line tool. Never throws; returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rsrnm::harness
