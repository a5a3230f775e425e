#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rsrnm {

/// Regression data: rows of X are samples x_i, y holds the targets.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;
};

/// Malformed dataset input. row/column are 1-based positions in the file
/// (0 when not applicable).
class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what), row_(row), column_(column) {}
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

struct SyntheticParams {
  Eigen::Index m = 600;
  Eigen::Index n = 1500;
  double noise_sd = 0.1;
  double outlier_fraction = 0.1;
  double outlier_scale = 5.0;
  double sparsity = 0.002;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Dataset data;
  Eigen::VectorXd true_w;
};

/// X_ij ~ N(0,1); true_w has ceil(sparsity * n) nonzero N(0,1) entries at
/// uniformly chosen positions; y = X true_w + N(0, noise_sd^2); each target
/// is independently an outlier with probability outlier_fraction and then
/// receives an extra N(0, outlier_scale^2) perturbation.
/// Throws std::invalid_argument on bad dimensions or fractions.
SyntheticData generate_synthetic(const SyntheticParams& params);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Writes a header `y,x1,...,xn` followed by one row per sample.
void write_dataset_csv(const Dataset& data, std::ostream& out);
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

/// One column `w`, one row per coefficient.
void write_weights_csv(const Eigen::VectorXd& w, const std::filesystem::path& path);

/// Reads a CSV with a header row containing exactly one column named `y`;
/// every other column is a feature, kept in file order. Throws DatasetError
/// with the offending row/column on malformed input.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace rsrnm
