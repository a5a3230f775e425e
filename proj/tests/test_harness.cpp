#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsrnm/harness.hpp"

namespace rsrnm::harness {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rsrnm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) out.push_back(c);
  return out;
}

// Drops the named column so timing noise does not enter byte comparisons.
std::string without_column(const std::string& csv, const std::string& name) {
  const auto rows = lines(csv);
  const auto header = cells(rows.at(0));
  const auto col = static_cast<std::size_t>(
      std::find(header.begin(), header.end(), name) - header.begin());
  std::string out;
  for (const auto& row : rows) {
    const auto c = cells(row);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i == col) continue;
      out += c[i];
      out += ',';
    }
    out += '\n';
  }
  return out;
}

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("rsrnm_harness_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }

  fs::path dir_;
};

TEST_F(HarnessTest, GenDataBenchmarkSize) {
  const auto r = cli({"gen-data", "--m", "600", "--n", "1500", "--seed", "1", "--out", path("d.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(slurp(path("d.csv")));
  ASSERT_EQ(rows.size(), 601u);
  EXPECT_EQ(cells(rows[0]).size(), 1501u);
  EXPECT_EQ(cells(rows[0])[0], "y");
  EXPECT_EQ(cells(rows[600]).size(), 1501u);
  const auto w = lines(slurp(path("d.csv.w.csv")));
  EXPECT_EQ(w.size(), 1501u);
  EXPECT_EQ(w[0], "w");
}

TEST_F(HarnessTest, GenDataMinimalAndDeterministic) {
  ASSERT_EQ(cli({"gen-data", "--m", "1", "--n", "1", "--out", path("a.csv")}).code, kExitOk);
  const auto rows = lines(slurp(path("a.csv")));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "y,x1");
  EXPECT_EQ(cells(rows[1]).size(), 2u);

  ASSERT_EQ(cli({"gen-data", "--m", "30", "--n", "12", "--seed", "5", "--out", path("b.csv")}).code, 0);
  ASSERT_EQ(cli({"gen-data", "--m", "30", "--n", "12", "--seed", "5", "--out", path("c.csv")}).code, 0);
  EXPECT_EQ(slurp(path("b.csv")), slurp(path("c.csv")));
  EXPECT_EQ(slurp(path("b.csv.w.csv")), slurp(path("c.csv.w.csv")));
}

TEST_F(HarnessTest, GenDataErrors) {
  EXPECT_EQ(cli({"gen-data", "--m", "5", "--n", "3", "--out", path("no/such/dir/x.csv")}).code,
            kExitIoError);
  EXPECT_EQ(cli({"gen-data", "--m", "0", "--out", path("x.csv")}).code, kExitInvalidArgs);
  EXPECT_EQ(cli({"gen-data", "--outlier-frac", "1.5", "--out", path("x.csv")}).code,
            kExitInvalidArgs);
  EXPECT_EQ(cli({"gen-data", "--m", "abc", "--out", path("x.csv")}).code, kExitInvalidArgs);
  EXPECT_EQ(cli({"gen-data", "--m", "5"}).code, kExitInvalidArgs);
  EXPECT_EQ(cli({}).code, kExitInvalidArgs);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitInvalidArgs);
}

TEST_F(HarnessTest, RunConvergesAndWritesTrace) {
  const auto r = cli({"run", "--m", "60", "--n", "40", "--sparsity", "0.1", "--solver", "rs_rnm",
                      "--s", "10", "--trace-out", path("t.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("status=converged"), std::string::npos);
  const auto rows = lines(slurp(path("t.csv")));
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows[0], kTraceHeader);
  const auto last = cells(rows.back());
  ASSERT_EQ(last.size(), 11u);
  EXPECT_LT(std::stod(last[2]), 1e-7);
  EXPECT_EQ(std::stoul(last[0]), rows.size() - 2);

  const auto summary = nlohmann::json::parse(slurp(path("t.csv.summary.json")));
  EXPECT_EQ(summary.at("status"), "converged");
  EXPECT_EQ(summary.at("iterations").get<std::size_t>(), rows.size() - 2);
}

TEST_F(HarnessTest, RunGdEmitsZeroShiftColumns) {
  const auto r = cli({"run", "--m", "40", "--n", "20", "--solver", "gd", "--max-iter", "25",
                      "--trace-out", path("gd.csv"), "--summary-out", path("gd.json")});
  EXPECT_TRUE(r.code == kExitOk || r.code == kExitMaxIter) << r.err;
  const auto rows = lines(slurp(path("gd.csv")));
  ASSERT_GE(rows.size(), 2u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = cells(rows[i]);
    EXPECT_EQ(c[3], "0");
    EXPECT_EQ(c[4], "0");
  }
  EXPECT_TRUE(fs::exists(path("gd.json")));
}

TEST_F(HarnessTest, RunExitCodes) {
  EXPECT_EQ(cli({"run", "--m", "40", "--n", "20", "--solver", "gd", "--max-iter", "2",
                 "--trace-out", path("a.csv")})
                .code,
            kExitMaxIter);
  EXPECT_EQ(cli({"run", "--m", "40", "--n", "20", "--solver", "gd", "--max-backtracks", "1",
                 "--alpha", "0.99", "--beta", "0.01", "--trace-out", path("b.csv")})
                .code,
            kExitLineSearchFailed);
  EXPECT_EQ(cli({"run", "--solver", "bfgs", "--trace-out", path("c.csv")}).code,
            kExitInvalidArgs);
  EXPECT_EQ(cli({"run", "--m", "10", "--n", "5"}).code, kExitInvalidArgs);
  EXPECT_EQ(cli({"run", "--c1", "0.5", "--trace-out", path("c.csv")}).code, kExitInvalidArgs);
  EXPECT_EQ(cli({"run", "--data", path("missing.csv"), "--trace-out", path("c.csv")}).code,
            kExitIoError);
}

TEST_F(HarnessTest, RunReportsMalformedCsvPosition) {
  const auto data = write("bad.csv", "y,x1,x2\n1,2,3\n4,oops,6\n");
  const auto r = cli({"run", "--data", data, "--trace-out", path("t.csv")});
  EXPECT_EQ(r.code, kExitIoError);
  EXPECT_NE(r.err.find("row 3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("column 2"), std::string::npos) << r.err;
}

TEST_F(HarnessTest, GenDataRoundTripsThroughRun) {
  ASSERT_EQ(cli({"gen-data", "--m", "50", "--n", "30", "--sparsity", "0.1", "--seed", "3",
                 "--out", path("d.csv")})
                .code,
            0);
  const auto from_file = cli({"run", "--data", path("d.csv"), "--solver", "rnm", "--trace-out",
                              path("file.csv")});
  const auto direct = cli({"run", "--m", "50", "--n", "30", "--sparsity", "0.1", "--data-seed",
                           "3", "--solver", "rnm", "--trace-out", path("direct.csv")});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  ASSERT_EQ(direct.code, 0) << direct.err;
  EXPECT_EQ(without_column(slurp(path("file.csv")), "elapsed_ms"),
            without_column(slurp(path("direct.csv")), "elapsed_ms"));
}

TEST_F(HarnessTest, RunIsDeterministicModuloTime) {
  for (const char* name : {"a.csv", "b.csv"}) {
    ASSERT_EQ(cli({"run", "--m", "50", "--n", "80", "--s", "10", "--seed", "4", "--x0",
                   "random", "--x0-seed", "2", "--loss", "welsch", "--max-iter", "40",
                   "--trace-out", path(name)})
                  .code == kExitInvalidArgs,
              false);
  }
  EXPECT_EQ(without_column(slurp(path("a.csv")), "elapsed_ms"),
            without_column(slurp(path("b.csv")), "elapsed_ms"));
}

TEST_F(HarnessTest, RunSketchSizesDiffer) {
  ASSERT_NE(cli({"run", "--m", "50", "--n", "80", "--s", "10", "--max-iter", "20",
                 "--trace-out", path("s10.csv")})
                .code,
            kExitInvalidArgs);
  ASSERT_NE(cli({"run", "--m", "50", "--n", "80", "--s", "40", "--max-iter", "20",
                 "--trace-out", path("s40.csv")})
                .code,
            kExitInvalidArgs);
  EXPECT_NE(without_column(slurp(path("s10.csv")), "elapsed_ms"),
            without_column(slurp(path("s40.csv")), "elapsed_ms"));
}

TEST_F(HarnessTest, ConfigFileAndFlagOverrides) {
  const auto cfg = write("c.json", R"({
    "problem": {"synthetic": {"m": 40, "n": 25, "sparsity": 0.1, "seed": 2}},
    "loss": "welsch",
    "lambda": 0.05,
    "solvers": [{"name": "rnm", "max_iter": 3}],
    "output": {"trace": ")" + path("cfg.csv") + R"("}
  })");
  const auto r = cli({"run", "--config", cfg});
  EXPECT_TRUE(r.code == kExitOk || r.code == kExitMaxIter) << r.err;
  EXPECT_LE(lines(slurp(path("cfg.csv"))).size(), 5u);
  const auto o = cli({"run", "--config", cfg, "--max-iter", "1", "--trace-out", path("o.csv")});
  EXPECT_EQ(o.code, kExitMaxIter) << o.err;
  EXPECT_EQ(lines(slurp(path("o.csv"))).size(), 3u);
}

TEST_F(HarnessTest, ConfigRejectsUnknownKeysAndBadSolvers) {
  EXPECT_EQ(cli({"run", "--config", write("a.json", R"({"lamda": 0.1})"), "--trace-out",
                 path("t.csv")})
                .code,
            kExitInvalidArgs);
  EXPECT_EQ(cli({"run", "--config",
                 write("b.json", R"({"solvers": [{"name": "rnm", "speed": 2}]})"),
                 "--trace-out", path("t.csv")})
                .code,
            kExitInvalidArgs);
  EXPECT_EQ(cli({"run", "--config", write("c.json", R"({"solvers": [{"name": "lbfgs"}]})"),
                 "--trace-out", path("t.csv")})
                .code,
            kExitInvalidArgs);
  EXPECT_EQ(cli({"run", "--config", write("d.json", "{not json"), "--trace-out", path("t.csv")})
                .code,
            kExitInvalidArgs);
  EXPECT_EQ(cli({"run", "--config", path("nope.json"), "--trace-out", path("t.csv")}).code,
            kExitIoError);
  EXPECT_THROW(parse_run_spec(R"({"solvers": [{"name": "gd"}, {"name": "gd"}]})"), ConfigError);
  EXPECT_THROW(parse_run_spec(R"({"problem": {"csv": "x", "synthetic": {}}})"), ConfigError);
  EXPECT_THROW(parse_run_spec(R"({"solvers": [{"name": "rs_rnm", "gamma": -1}]})"),
               ConfigError);
}

TEST_F(HarnessTest, ParseRunSpecDefaultsAndLabels) {
  const RunSpec spec = parse_run_spec(
      R"({"x0": "random", "x0_seed": 9, "solvers": [{"name": "rs_rnm", "s": 200},
          {"name": "gd", "label": "baseline"}]})");
  EXPECT_EQ(spec.x0, X0Policy::random);
  EXPECT_EQ(spec.x0_seed, 9u);
  EXPECT_EQ(spec.lambda, 0.01);
  ASSERT_EQ(spec.solvers.size(), 2u);
  EXPECT_EQ(spec.solvers[0].label, "rs_rnm_s200");
  EXPECT_EQ(spec.solvers[1].label, "baseline");
  EXPECT_TRUE(std::holds_alternative<SyntheticParams>(spec.problem));
  EXPECT_EQ(initial_point(parse_run_spec("{}"), 4), Eigen::VectorXd::Zero(4));
}

TEST_F(HarnessTest, CompareSelfIsIdentical) {
  const auto cfg = write("c.json", R"({
    "problem": {"synthetic": {"m": 50, "n": 60, "sparsity": 0.1, "seed": 4}},
    "solvers": [{"name": "rs_rnm", "s": 10, "seed": 3, "label": "a"},
                {"name": "rs_rnm", "s": 10, "seed": 3, "label": "b"},
                {"name": "gd", "max_iter": 5}]
  })");
  const auto r = cli({"compare", "--config", cfg, "--out", path("all.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::vector<std::string> a, b;
  bool gd_seen = false;
  for (const auto& row : lines(slurp(path("all.csv")))) {
    auto c = cells(row);
    const std::string label = c[0];
    c.pop_back();
    std::string key;
    for (std::size_t i = 1; i < c.size(); ++i) key += c[i] + ",";
    if (label == "a") a.push_back(key);
    if (label == "b") b.push_back(key);
    gd_seen = gd_seen || label == "gd";
  }
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  EXPECT_TRUE(gd_seen);

  const auto summary = lines(slurp(path("all.csv.summary.csv")));
  ASSERT_EQ(summary.size(), 4u);
  EXPECT_EQ(summary[0],
            "solver,kind,status,iterations,final_f,final_grad_norm,seconds,iterations_to_tol,"
            "seconds_to_tol");
  EXPECT_EQ(cells(summary[3])[2], "max_iter");
}

TEST_F(HarnessTest, CompareOrderIgnoresThreadCount) {
  const auto cfg = write("c.json", R"({
    "problem": {"synthetic": {"m": 40, "n": 30, "sparsity": 0.1, "seed": 1}},
    "solvers": [{"name": "gd", "max_iter": 50}, {"name": "rnm"}, {"name": "rs_rnm", "s": 5}]
  })");
  ::setenv("RSRNM_THREADS", "1", 1);
  ASSERT_EQ(cli({"compare", "--config", cfg, "--out", path("one.csv")}).code, kExitOk);
  ::setenv("RSRNM_THREADS", "3", 1);
  ASSERT_EQ(cli({"compare", "--config", cfg, "--out", path("three.csv")}).code, kExitOk);
  ::unsetenv("RSRNM_THREADS");
  EXPECT_EQ(without_column(slurp(path("one.csv")), "elapsed_ms_cumulative"),
            without_column(slurp(path("three.csv")), "elapsed_ms_cumulative"));
}

TEST_F(HarnessTest, CompareNeedsTwoSolvers) {
  const auto cfg = write("c.json", R"({"solvers": [{"name": "gd"}]})");
  EXPECT_EQ(cli({"compare", "--config", cfg, "--out", path("x.csv")}).code, kExitInvalidArgs);
}

TEST_F(HarnessTest, ConcentrationReport) {
  const auto r = cli({"concentration", "--s", "20", "--n", "200", "--trials", "50", "--seed",
                      "2", "--out", path("c.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("c.json")));
  EXPECT_EQ(j.at("trials"), 50);
  EXPECT_LE(j.at("gram_norm_max").get<double>(), 3.0 * 200 / 20);
  EXPECT_GT(j.at("sigma_min_min").get<double>(), 0.0);
  ASSERT_EQ(cli({"concentration", "--s", "20", "--n", "200", "--trials", "50", "--seed", "2",
                 "--threads", "2", "--out", path("d.json")})
                .code,
            kExitOk);
  EXPECT_EQ(slurp(path("c.json")), slurp(path("d.json")));
  EXPECT_EQ(cli({"concentration", "--s", "0"}).code, kExitInvalidArgs);
}

TEST_F(HarnessTest, RateOnGeometricTrace) {
  std::string trace = "k,f\n";
  for (int k = 0; k < 40; ++k) trace += std::to_string(k) + "," + std::to_string(std::ldexp(1.0, -k)) + "\n";
  const auto file = write("g.csv", trace);
  const auto r = cli({"rate", "--trace", file, "--f-star", "0", "--out", path("r.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_DOUBLE_EQ(j.at("kappa_hat").get<double>(), 0.5);
  EXPECT_EQ(j.at("classification"), "linear");
  EXPECT_TRUE(j.at("dist_ratio_min").is_null());

  const auto bad = cli({"rate", "--trace", file, "--f-star", "0", "--tail", "41"});
  EXPECT_EQ(bad.code, kExitInvalidArgs);
  EXPECT_NE(bad.err.find("exceeds"), std::string::npos);
  EXPECT_EQ(cli({"rate", "--trace", file}).code, kExitInvalidArgs);
  EXPECT_EQ(cli({"rate", "--trace", path("none.csv"), "--f-star", "0"}).code, kExitIoError);
}

TEST_F(HarnessTest, HelpExitsCleanly) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("gen-data"), std::string::npos);
}

}  // namespace
}  // namespace rsrnm::harness
