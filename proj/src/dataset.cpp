#include "rsrnm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "rsrnm/rng.hpp"

namespace rsrnm {

SyntheticData generate_synthetic(const SyntheticParams& p) {
  if (p.m < 1 || p.n < 1) {
    throw std::invalid_argument("generate_synthetic: m and n must be >= 1");
  }
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.outlier_fraction) || !in_unit(p.sparsity)) {
    throw std::invalid_argument(
        "generate_synthetic: outlier_fraction and sparsity must lie in [0,1]");
  }
  if (!(p.noise_sd >= 0.0) || !(p.outlier_scale >= 0.0)) {
    throw std::invalid_argument(
        "generate_synthetic: noise_sd and outlier_scale must be non-negative");
  }

  const Rng root(p.seed);
  SyntheticData out;
  Dataset& d = out.data;

  Rng x_rng = root.split(1);
  d.X.resize(p.m, p.n);
  for (Eigen::Index i = 0; i < p.m; ++i)
    for (Eigen::Index j = 0; j < p.n; ++j) d.X(i, j) = x_rng.normal();

  Rng w_rng = root.split(2);
  const auto nonzeros = static_cast<Eigen::Index>(
      std::ceil(p.sparsity * static_cast<double>(p.n) - 1e-9));
  std::vector<Eigen::Index> positions(static_cast<std::size_t>(p.n));
  std::iota(positions.begin(), positions.end(), Eigen::Index{0});
  // Partial Fisher-Yates: the first `nonzeros` slots form the support.
  for (Eigen::Index k = 0; k < nonzeros; ++k) {
    const auto remaining = static_cast<std::uint64_t>(p.n - k);
    const auto pick = k + static_cast<Eigen::Index>(w_rng.next_u64() % remaining);
    std::swap(positions[static_cast<std::size_t>(k)],
              positions[static_cast<std::size_t>(pick)]);
  }
  out.true_w = Eigen::VectorXd::Zero(p.n);
  for (Eigen::Index k = 0; k < nonzeros; ++k) {
    out.true_w(positions[static_cast<std::size_t>(k)]) = w_rng.normal();
  }

  d.y = d.X * out.true_w;
  Rng noise_rng = root.split(3);
  if (p.noise_sd > 0.0) {
    for (Eigen::Index i = 0; i < p.m; ++i) d.y(i) += p.noise_sd * noise_rng.normal();
  }
  Rng outlier_rng = root.split(4);
  if (p.outlier_fraction > 0.0) {
    for (Eigen::Index i = 0; i < p.m; ++i) {
      const bool hit = outlier_rng.uniform() < p.outlier_fraction;
      const double z = outlier_rng.normal();
      if (hit) d.y(i) += p.outlier_scale * z;
    }
  }

  d.feature_names.reserve(static_cast<std::size_t>(p.n));
  for (Eigen::Index j = 0; j < p.n; ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  const Eigen::Index n = data.X.cols();
  out << "y";
  for (Eigen::Index j = 0; j < n; ++j) {
    out << ',';
    if (static_cast<std::size_t>(j) < data.feature_names.size()) {
      out << data.feature_names[static_cast<std::size_t>(j)];
    } else {
      out << 'x' << (j + 1);
    }
  }
  out << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    line = format_double(data.y(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      line += ',';
      line += format_double(data.X(i, j));
    }
    line += '\n';
    out << line;
  }
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_dataset_csv(data, out);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void write_weights_csv(const Eigen::VectorXd& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "w\n";
  for (Eigen::Index i = 0; i < w.size(); ++i) out << format_double(w(i)) << '\n';
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("empty dataset: missing header", 1, 0);
  std::string_view header = line;
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  const auto names = split_fields(trim(header));

  std::ptrdiff_t y_col = -1;
  std::vector<std::string> features;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const std::string_view name = trim(names[c]);
    if (name == "y") {
      if (y_col >= 0) throw DatasetError("header has more than one 'y' column", 1, c + 1);
      y_col = static_cast<std::ptrdiff_t>(c);
    } else {
      features.emplace_back(name);
    }
  }
  if (y_col < 0) throw DatasetError("header has no 'y' column", 1, 0);
  if (features.empty()) throw DatasetError("header has no feature columns", 1, 0);

  std::vector<double> values;
  std::vector<double> targets;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto fields = split_fields(body);
    if (fields.size() != names.size()) {
      throw DatasetError("row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(names.size()),
                         row, 0);
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view f = trim(fields[c]);
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() ||
          !std::isfinite(v)) {
        throw DatasetError("row " + std::to_string(row) + ", column " +
                               std::to_string(c + 1) + ": '" + std::string(f) +
                               "' is not a finite number",
                           row, c + 1);
      }
      if (static_cast<std::ptrdiff_t>(c) == y_col) {
        targets.push_back(v);
      } else {
        values.push_back(v);
      }
    }
  }
  if (targets.empty()) throw DatasetError("dataset has no data rows", row, 0);

  Dataset d;
  const auto m = static_cast<Eigen::Index>(targets.size());
  const auto n = static_cast<Eigen::Index>(features.size());
  d.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(values.data(), m, n);
  d.y = Eigen::Map<const Eigen::VectorXd>(targets.data(), m);
  d.feature_names = std::move(features);
  return d;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open '" + path.string() + "'", 0, 0);
  return read_dataset_csv(in);
}

}  // namespace rsrnm
