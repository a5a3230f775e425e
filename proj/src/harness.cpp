#include "rsrnm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsrnm/diagnostics.hpp"
#include "rsrnm/rng.hpp"
#include "rsrnm/sketch.hpp"

namespace rsrnm::harness {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return kExitOk;
    case RunStatus::max_iter: return kExitMaxIter;
    case RunStatus::line_search_failed: return kExitLineSearchFailed;
  }
  return kExitInvalidArgs;
}

std::string default_label(SolverKind kind, const SolverConfig& cfg) {
  if (kind == SolverKind::rs_rnm) return "rs_rnm_s" + std::to_string(cfg.s);
  return std::string(to_string(kind));
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& target, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    target = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

SyntheticParams parse_synthetic(const json& obj) {
  reject_unknown_keys(obj,
                      {"m", "n", "noise_sd", "outlier_frac", "outlier_scale", "sparsity",
                       "seed"},
                      "problem.synthetic");
  SyntheticParams p;
  read_if(obj, "m", p.m, "problem.synthetic");
  read_if(obj, "n", p.n, "problem.synthetic");
  read_if(obj, "noise_sd", p.noise_sd, "problem.synthetic");
  read_if(obj, "outlier_frac", p.outlier_fraction, "problem.synthetic");
  read_if(obj, "outlier_scale", p.outlier_scale, "problem.synthetic");
  read_if(obj, "sparsity", p.sparsity, "problem.synthetic");
  read_if(obj, "seed", p.seed, "problem.synthetic");
  return p;
}

SolverEntry parse_solver(const json& obj, std::size_t index) {
  const std::string where = "solvers[" + std::to_string(index) + "]";
  reject_unknown_keys(obj,
                      {"name", "label", "c1", "c2", "gamma", "alpha", "beta", "s",
                       "grad_tol", "max_iter", "max_backtracks", "seed"},
                      where);
  SolverEntry e;
  std::string name;
  read_if(obj, "name", name, where);
  if (name.empty()) throw ConfigError(where + " needs a 'name'");
  try {
    e.kind = parse_solver_kind(name);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
  read_if(obj, "c1", e.cfg.c1, where);
  read_if(obj, "c2", e.cfg.c2, where);
  read_if(obj, "gamma", e.cfg.gamma, where);
  read_if(obj, "alpha", e.cfg.alpha, where);
  read_if(obj, "beta", e.cfg.beta, where);
  read_if(obj, "s", e.cfg.s, where);
  read_if(obj, "grad_tol", e.cfg.grad_tol, where);
  read_if(obj, "max_iter", e.cfg.max_iter, where);
  read_if(obj, "max_backtracks", e.cfg.max_backtracks, where);
  read_if(obj, "seed", e.cfg.seed, where);
  read_if(obj, "label", e.label, where);
  try {
    e.cfg.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
  if (e.label.empty()) e.label = default_label(e.kind, e.cfg);
  return e;
}

void check_labels(const RunSpec& spec) {
  std::set<std::string> seen;
  for (const auto& s : spec.solvers) {
    if (!seen.insert(s.label).second) {
      throw ConfigError("duplicate solver label '" + s.label + "'");
    }
  }
}

}  // namespace

RunSpec parse_run_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(doc, {"problem", "loss", "lambda", "x0", "x0_seed", "solvers", "output"},
                      "config");
  RunSpec spec;
  if (const auto it = doc.find("problem"); it != doc.end()) {
    reject_unknown_keys(*it, {"csv", "synthetic"}, "problem");
    if (it->contains("csv") == it->contains("synthetic")) {
      throw ConfigError("problem needs exactly one of 'csv' or 'synthetic'");
    }
    if (it->contains("csv")) {
      std::string path;
      read_if(*it, "csv", path, "problem");
      spec.problem = fs::path(path);
    } else {
      spec.problem = parse_synthetic(it->at("synthetic"));
    }
  }
  if (const auto it = doc.find("loss"); it != doc.end()) {
    try {
      spec.loss = parse_loss_kind(it->get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("loss: ") + e.what());
    }
  }
  read_if(doc, "lambda", spec.lambda, "config");
  if (!(spec.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (const auto it = doc.find("x0"); it != doc.end()) {
    const std::string policy = it->is_string() ? it->get<std::string>() : "";
    if (policy == "zeros") {
      spec.x0 = X0Policy::zeros;
    } else if (policy == "random") {
      spec.x0 = X0Policy::random;
    } else {
      throw ConfigError("x0 must be \"zeros\" or \"random\"");
    }
  }
  read_if(doc, "x0_seed", spec.x0_seed, "config");
  if (const auto it = doc.find("solvers"); it != doc.end()) {
    if (!it->is_array()) throw ConfigError("solvers must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      spec.solvers.push_back(parse_solver((*it)[i], i));
    }
  }
  if (const auto it = doc.find("output"); it != doc.end()) {
    reject_unknown_keys(*it, {"trace", "summary", "combined"}, "output");
    std::string p;
    if (it->contains("trace")) {
      read_if(*it, "trace", p, "output");
      spec.trace_out = p;
    }
    if (it->contains("summary")) {
      read_if(*it, "summary", p, "output");
      spec.summary_out = p;
    }
    if (it->contains("combined")) {
      read_if(*it, "combined", p, "output");
      spec.combined_out = p;
    }
  }
  check_labels(spec);
  return spec;
}

RunSpec load_run_spec(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_spec(buf.str());
}

Dataset materialize_dataset(const RunSpec& spec) {
  if (const auto* path = std::get_if<fs::path>(&spec.problem)) {
    if (!fs::exists(*path)) throw IoError("dataset '" + path->string() + "' does not exist");
    return read_dataset_csv(*path);
  }
  try {
    return generate_synthetic(std::get<SyntheticParams>(spec.problem)).data;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Eigen::VectorXd initial_point(const RunSpec& spec, Eigen::Index n) {
  if (spec.x0 == X0Policy::zeros) return Eigen::VectorXd::Zero(n);
  Rng rng(spec.x0_seed);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.normal();
  return x;
}

void write_trace_csv(const RunResult& result, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : result.trace) {
    out << r.k << ',' << format_double(r.f) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.lambda_shift) << ',' << format_double(r.eta) << ','
        << format_double(r.step) << ',' << r.backtracks << ',' << format_double(r.gtd) << ','
        << format_double(r.d_norm) << ',' << format_double(r.mu_sq) << ','
        << format_double(r.elapsed_ms) << '\n';
  }
  out << result.trace.size() << ',' << format_double(result.final_f) << ','
      << format_double(result.final_grad_norm) << ",0,0,0,0,0,0,0,0\n";
}

void write_combined_rows(const std::string& label, const RunResult& result,
                         std::ostream& out) {
  double cumulative = 0.0;
  for (const auto& r : result.trace) {
    out << label << ',' << r.k << ',' << format_double(r.f) << ','
        << format_double(r.grad_norm) << ',' << format_double(cumulative) << '\n';
    cumulative += r.elapsed_ms;
  }
  out << label << ',' << result.trace.size() << ',' << format_double(result.final_f) << ','
      << format_double(result.final_grad_norm) << ',' << format_double(cumulative) << '\n';
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

json run_summary(const SolverEntry& entry, const RunResult& r) {
  json j;
  j["solver"] = std::string(to_string(entry.kind));
  j["label"] = entry.label;
  j["status"] = std::string(to_string(r.status));
  j["iterations"] = r.trace.size();
  j["final_f"] = number_or_null(r.final_f);
  j["final_grad_norm"] = number_or_null(r.final_grad_norm);
  j["total_seconds"] = r.total_seconds;
  return j;
}

std::string summary_line(const RunResult& r) {
  std::ostringstream s;
  s << "status=" << to_string(r.status) << " iterations=" << r.trace.size()
    << " final_f=" << format_double(r.final_f)
    << " final_grad_norm=" << format_double(r.final_grad_norm) << " total_seconds="
    << std::fixed << std::setprecision(3) << r.total_seconds;
  return s.str();
}

// Flags shared by `run` and `compare` that override the config's problem block.
struct ProblemFlags {
  std::optional<std::string> data;
  std::optional<Eigen::Index> m, n;
  std::optional<double> noise_sd, outlier_frac, outlier_scale, sparsity;
  std::optional<std::uint64_t> data_seed;
  std::optional<std::string> loss;
  std::optional<double> lambda;
  std::optional<std::string> x0;
  std::optional<std::uint64_t> x0_seed;

  void attach(CLI::App* app) {
    app->add_option("--data", data, "Dataset CSV (header with a 'y' column)");
    app->add_option("--m", m, "Synthetic samples");
    app->add_option("--n", n, "Synthetic features");
    app->add_option("--noise-sd", noise_sd, "Synthetic noise standard deviation");
    app->add_option("--outlier-frac", outlier_frac, "Synthetic outlier fraction");
    app->add_option("--outlier-scale", outlier_scale, "Synthetic outlier scale");
    app->add_option("--sparsity", sparsity, "Synthetic fraction of nonzero weights");
    app->add_option("--data-seed", data_seed, "Synthetic generator seed");
    app->add_option("--loss", loss, "geman_mcclure | welsch");
    app->add_option("--lambda", lambda, "Ridge coefficient");
    app->add_option("--x0", x0, "zeros | random");
    app->add_option("--x0-seed", x0_seed, "Seed for --x0 random");
  }

  void apply(RunSpec& spec) const {
    if (data) spec.problem = fs::path(*data);
    const bool synthetic_flag =
        m || n || noise_sd || outlier_frac || outlier_scale || sparsity || data_seed;
    if (synthetic_flag) {
      if (data) throw ConfigError("--data cannot be combined with synthetic flags");
      if (!std::holds_alternative<SyntheticParams>(spec.problem)) spec.problem = SyntheticParams{};
      auto& p = std::get<SyntheticParams>(spec.problem);
      if (m) p.m = *m;
      if (n) p.n = *n;
      if (noise_sd) p.noise_sd = *noise_sd;
      if (outlier_frac) p.outlier_fraction = *outlier_frac;
      if (outlier_scale) p.outlier_scale = *outlier_scale;
      if (sparsity) p.sparsity = *sparsity;
      if (data_seed) p.seed = *data_seed;
    }
    if (loss) {
      try {
        spec.loss = parse_loss_kind(*loss);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    if (lambda) {
      if (!(*lambda >= 0.0)) throw ConfigError("--lambda must be non-negative");
      spec.lambda = *lambda;
    }
    if (x0) {
      if (*x0 == "zeros") {
        spec.x0 = X0Policy::zeros;
      } else if (*x0 == "random") {
        spec.x0 = X0Policy::random;
      } else {
        throw ConfigError("--x0 must be zeros or random");
      }
    }
    if (x0_seed) spec.x0_seed = *x0_seed;
  }
};

struct SolverFlags {
  std::optional<std::string> solver;
  std::optional<double> c1, c2, gamma, alpha, beta, grad_tol;
  std::optional<Index> s;
  std::optional<int> max_iter, max_backtracks;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--solver", solver, "rs_rnm | rnm | gd");
    app->add_option("--s", s, "Sketch size (rs_rnm)");
    app->add_option("--c1", c1);
    app->add_option("--c2", c2);
    app->add_option("--gamma", gamma);
    app->add_option("--alpha", alpha);
    app->add_option("--beta", beta);
    app->add_option("--grad-tol", grad_tol, "Stop when ||grad f|| < grad-tol");
    app->add_option("--max-iter", max_iter);
    app->add_option("--max-backtracks", max_backtracks);
    app->add_option("--seed", seed, "Sketch seed");
  }

  void apply(SolverEntry& e) const {
    const bool relabel = e.label.empty() || e.label == default_label(e.kind, e.cfg);
    if (solver) {
      try {
        e.kind = parse_solver_kind(*solver);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
      }
    }
    if (c1) e.cfg.c1 = *c1;
    if (c2) e.cfg.c2 = *c2;
    if (gamma) e.cfg.gamma = *gamma;
    if (alpha) e.cfg.alpha = *alpha;
    if (beta) e.cfg.beta = *beta;
    if (s) e.cfg.s = *s;
    if (grad_tol) e.cfg.grad_tol = *grad_tol;
    if (max_iter) e.cfg.max_iter = *max_iter;
    if (max_backtracks) e.cfg.max_backtracks = *max_backtracks;
    if (seed) e.cfg.seed = *seed;
    try {
      e.cfg.validate();
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
    if (relabel) e.label = default_label(e.kind, e.cfg);
  }
};

RunResult execute(const RobustRegression& problem, const RunSpec& spec, const SolverEntry& e) {
  // Trace files carry no audit columns, so skip the per-iteration ||P^T P||.
  RunOptions opts;
  opts.audit = false;
  opts.shift_check_every = 0;
  return run(problem, initial_point(spec, problem.dim()), e.kind, e.cfg, opts);
}

unsigned comparison_threads(std::size_t entries) {
  unsigned threads = static_cast<unsigned>(std::max<std::size_t>(1, entries));
  if (const char* env = std::getenv("RSRNM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) {
      threads = std::min<unsigned>(threads, static_cast<unsigned>(v));
    }
  }
  return threads;
}

int cmd_gen_data(const SyntheticParams& p, const fs::path& out_path, std::ostream& out) {
  SyntheticData syn;
  try {
    syn = generate_synthetic(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  {
    std::ofstream f = open_output(out_path);
    write_dataset_csv(syn.data, f);
    if (!f) throw IoError("write to '" + out_path.string() + "' failed");
  }
  fs::path sidecar = out_path;
  sidecar += ".w.csv";
  try {
    write_weights_csv(syn.true_w, sidecar);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  out << "wrote " << out_path.string() << " (" << p.m << " rows, " << p.n + 1
      << " columns) and " << sidecar.string() << '\n';
  return kExitOk;
}

int cmd_run(RunSpec spec, std::ostream& out) {
  if (spec.solvers.empty()) {
    SolverEntry e;
    e.label = default_label(e.kind, e.cfg);
    spec.solvers.push_back(e);
  }
  const SolverEntry& entry = spec.solvers.front();
  if (!spec.trace_out) throw ConfigError("run needs --trace-out (or output.trace in the config)");
  fs::path summary_path = spec.summary_out.value_or(fs::path(spec.trace_out->string() + ".summary.json"));

  const RobustRegression problem(materialize_dataset(spec), spec.loss, spec.lambda);
  const RunResult r = execute(problem, spec, entry);

  {
    std::ofstream f = open_output(*spec.trace_out);
    write_trace_csv(r, f);
    if (!f) throw IoError("write to '" + spec.trace_out->string() + "' failed");
  }
  write_text(summary_path, run_summary(entry, r).dump(2) + "\n");
  out << summary_line(r) << '\n';
  return exit_code_for(r.status);
}

int cmd_compare(const RunSpec& spec, std::ostream& out) {
  if (spec.solvers.size() < 2) throw ConfigError("compare needs at least 2 solver entries");
  if (!spec.combined_out) throw ConfigError("compare needs --out (or output.combined)");
  const fs::path summary_path =
      spec.summary_out.value_or(fs::path(spec.combined_out->string() + ".summary.csv"));

  const RobustRegression problem(materialize_dataset(spec), spec.loss, spec.lambda);
  const std::size_t count = spec.solvers.size();
  std::vector<std::optional<RunResult>> results(count);
  std::vector<std::string> errors(count);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = execute(problem, spec, spec.solvers[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned threads = comparison_threads(count);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::ostringstream combined;
  combined << "solver,k,f,grad_norm,elapsed_ms_cumulative\n";
  std::ostringstream summary;
  summary << "solver,kind,status,iterations,final_f,final_grad_norm,seconds,"
             "iterations_to_tol,seconds_to_tol\n";
  bool any_converged = false;
  out << std::left << std::setw(18) << "solver" << std::setw(20) << "status" << std::right
      << std::setw(12) << "iterations" << std::setw(14) << "seconds" << std::setw(16)
      << "final_grad" << '\n';
  for (std::size_t i = 0; i < count; ++i) {
    const SolverEntry& e = spec.solvers[i];
    if (!results[i]) {
      summary << e.label << ',' << to_string(e.kind) << ",error,,,,,,\n";
      out << std::left << std::setw(18) << e.label << "error: " << errors[i] << '\n';
      continue;
    }
    const RunResult& r = *results[i];
    write_combined_rows(e.label, r, combined);
    const bool converged = r.status == RunStatus::converged;
    any_converged = any_converged || converged;
    summary << e.label << ',' << to_string(e.kind) << ',' << to_string(r.status) << ','
            << r.trace.size() << ',' << format_double(r.final_f) << ','
            << format_double(r.final_grad_norm) << ',' << format_double(r.total_seconds)
            << ',';
    if (converged) {
      summary << r.trace.size() << ',' << format_double(r.total_seconds);
    } else {
      summary << ',';
    }
    summary << '\n';
    out << std::left << std::setw(18) << e.label << std::setw(20) << to_string(r.status)
        << std::right << std::setw(12) << r.trace.size() << std::setw(14) << std::fixed
        << std::setprecision(3) << r.total_seconds << std::setw(16) << std::scientific
        << std::setprecision(3) << r.final_grad_norm << std::defaultfloat << '\n';
  }
  write_text(*spec.combined_out, combined.str());
  write_text(summary_path, summary.str());
  return any_converged ? kExitOk : kExitMaxIter;
}

int cmd_concentration(Index s, Index n, std::size_t trials, double eps, std::uint64_t seed,
                      unsigned threads, const std::optional<std::string>& out_path,
                      std::ostream& out) {
  ConcentrationReport rep;
  try {
    rep = concentration_study(s, n, trials, eps, seed, std::nullopt, threads);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  json j;
  j["s"] = rep.s;
  j["n"] = rep.n;
  j["seed"] = seed;
  j["trials"] = rep.trials;
  j["jl_epsilon"] = rep.jl_epsilon;
  j["jl_success_fraction"] = rep.jl_success_fraction;
  j["gram_norm_max"] = rep.gram_norm_max;
  j["gram_norm_mean"] = rep.gram_norm_mean;
  j["sigma_min_min"] = rep.sigma_min_min;
  j["sigma_max_max"] = rep.sigma_max_max;
  const std::string text = j.dump(2) + "\n";
  if (out_path) {
    write_text(*out_path, text);
  } else {
    out << text;
  }
  return kExitOk;
}

std::vector<double> read_f_column(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read trace '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("trace '" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), "f");
  if (it == header.end()) throw IoError("trace '" + path.string() + "' has no 'f' column");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> f;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    bool found = false;
    while (std::getline(ss, cell, ',')) {
      if (c++ == col) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || *end != '\0') {
          throw IoError("trace row " + std::to_string(row) + ": bad f value '" + cell + "'");
        }
        f.push_back(v);
        found = true;
        break;
      }
    }
    if (!found) throw IoError("trace row " + std::to_string(row) + " is missing column f");
  }
  return f;
}

int cmd_rate(const fs::path& trace_path, double f_star, std::size_t tail,
             const std::optional<std::string>& out_path, std::ostream& out) {
  const std::vector<double> f = read_f_column(trace_path);
  if (tail > f.size()) {
    throw ConfigError("--tail " + std::to_string(tail) + " exceeds the trace length " +
                      std::to_string(f.size()));
  }
  RateEstimate est;
  try {
    est = estimate_local_rate(f, f_star, tail);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  json j;
  j["f_star"] = f_star;
  j["tail_length"] = est.tail_length;
  j["ratio_count"] = est.ratio_count;
  j["kappa_hat"] = est.kappa_hat;
  j["kappa_max"] = est.kappa_max;
  j["dist_ratio_min"] = number_or_null(est.dist_ratio_min);
  j["classification"] = std::string(to_string(est.classification));
  j["ratios"] = est.ratios;
  const std::string text = j.dump(2) + "\n";
  if (out_path) {
    write_text(*out_path, text);
  } else {
    out << text;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized subspace regularized Newton benchmarks"};
  app.require_subcommand(1);

  // gen-data
  SyntheticParams gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic robust-regression dataset");
  gen_cmd->add_option("--m", gen.m, "Samples")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Features")->capture_default_str();
  gen_cmd->add_option("--noise-sd", gen.noise_sd)->capture_default_str();
  gen_cmd->add_option("--outlier-frac", gen.outlier_fraction)->capture_default_str();
  gen_cmd->add_option("--outlier-scale", gen.outlier_scale)->capture_default_str();
  gen_cmd->add_option("--sparsity", gen.sparsity)->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output CSV; weights go to <out>.w.csv")->required();

  // run
  std::optional<std::string> run_config, run_trace, run_summary_path;
  ProblemFlags run_problem;
  SolverFlags run_solver;
  auto* run_cmd = app.add_subcommand("run", "Run one solver and write its trace");
  run_cmd->add_option("--config", run_config, "RunSpec JSON");
  run_cmd->add_option("--trace-out", run_trace, "Trace CSV path");
  run_cmd->add_option("--summary-out", run_summary_path, "Summary JSON path");
  run_problem.attach(run_cmd);
  run_solver.attach(run_cmd);

  // compare
  std::optional<std::string> cmp_config, cmp_out, cmp_summary;
  ProblemFlags cmp_problem;
  auto* cmp_cmd = app.add_subcommand("compare", "Run every configured solver on one problem");
  cmp_cmd->add_option("--config", cmp_config, "RunSpec JSON listing >= 2 solvers")->required();
  cmp_cmd->add_option("--out", cmp_out, "Combined long-format CSV");
  cmp_cmd->add_option("--summary-out", cmp_summary, "Per-solver summary CSV");
  cmp_problem.attach(cmp_cmd);

  // concentration
  Index conc_s = 100, conc_n = 1500;
  std::size_t conc_trials = 1000;
  double conc_eps = 0.5;
  std::uint64_t conc_seed = 0;
  unsigned conc_threads = 1;
  std::optional<std::string> conc_out;
  auto* conc_cmd = app.add_subcommand("concentration", "Monte Carlo sketch concentration study");
  conc_cmd->add_option("--s", conc_s)->capture_default_str();
  conc_cmd->add_option("--n", conc_n)->capture_default_str();
  conc_cmd->add_option("--trials", conc_trials)->capture_default_str();
  conc_cmd->add_option("--eps", conc_eps, "JL distortion")->capture_default_str();
  conc_cmd->add_option("--seed", conc_seed)->capture_default_str();
  conc_cmd->add_option("--threads", conc_threads)->capture_default_str();
  conc_cmd->add_option("--out", conc_out, "Report JSON (stdout when omitted)");

  // rate
  std::string rate_trace;
  double rate_f_star = 0.0;
  std::size_t rate_tail = 30;
  std::optional<std::string> rate_out;
  auto* rate_cmd = app.add_subcommand("rate", "Estimate the local convergence rate of a trace");
  rate_cmd->add_option("--trace", rate_trace, "CSV with an 'f' column")->required();
  rate_cmd->add_option("--f-star", rate_f_star, "Optimal value")->required();
  rate_cmd->add_option("--tail", rate_tail, "Number of final values used")->capture_default_str();
  rate_cmd->add_option("--out", rate_out, "Report JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidArgs;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen, gen_out, out);
    if (run_cmd->parsed()) {
      RunSpec spec = run_config ? load_run_spec(*run_config) : RunSpec{};
      run_problem.apply(spec);
      if (spec.solvers.empty()) spec.solvers.push_back(SolverEntry{});
      run_solver.apply(spec.solvers.front());
      if (run_trace) spec.trace_out = *run_trace;
      if (run_summary_path) spec.summary_out = *run_summary_path;
      return cmd_run(std::move(spec), out);
    }
    if (cmp_cmd->parsed()) {
      RunSpec spec = load_run_spec(*cmp_config);
      cmp_problem.apply(spec);
      if (cmp_out) spec.combined_out = *cmp_out;
      if (cmp_summary) spec.summary_out = *cmp_summary;
      return cmd_compare(spec, out);
    }
    if (conc_cmd->parsed()) {
      return cmd_concentration(conc_s, conc_n, conc_trials, conc_eps, conc_seed, conc_threads,
                               conc_out, out);
    }
    if (rate_cmd->parsed()) return cmd_rate(rate_trace, rate_f_star, rate_tail, rate_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidArgs;
  } catch (const DatasetError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoError;
  }
  return kExitInvalidArgs;
}

}  // namespace rsrnm::harness
