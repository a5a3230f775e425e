#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "rsrnm/dataset.hpp"
#include "rsrnm/rng.hpp"

namespace rsrnm {
namespace {

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.normal() * std::pow(10.0, static_cast<int>(rng.next_u64() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(DatasetCsv, WriteReadPreservesValuesAndOrder) {
  SyntheticParams p;
  p.m = 17;
  p.n = 6;
  p.sparsity = 0.5;
  const SyntheticData syn = generate_synthetic(p);
  std::stringstream buf;
  write_dataset_csv(syn.data, buf);
  const Dataset back = read_dataset_csv(buf);
  EXPECT_TRUE((back.X.array() == syn.data.X.array()).all());
  EXPECT_TRUE((back.y.array() == syn.data.y.array()).all());
  EXPECT_EQ(back.feature_names, syn.data.feature_names);
}

TEST(DatasetCsv, TargetColumnMayAppearAnywhere) {
  std::istringstream in("a,y,b\n1,2,3\n4,5,6\n");
  const Dataset d = read_dataset_csv(in);
  ASSERT_EQ(d.X.rows(), 2);
  ASSERT_EQ(d.X.cols(), 2);
  EXPECT_EQ(d.y(0), 2.0);
  EXPECT_EQ(d.y(1), 5.0);
  EXPECT_EQ(d.X(1, 0), 4.0);
  EXPECT_EQ(d.X(1, 1), 6.0);
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"a", "b"}));
}

TEST(DatasetCsv, AcceptsCrlfAndBom) {
  std::istringstream in("\xEF\xBB\xBFy,x1\r\n1.5,-2e-3\r\n");
  const Dataset d = read_dataset_csv(in);
  EXPECT_EQ(d.y(0), 1.5);
  EXPECT_EQ(d.X(0, 0), -2e-3);
}

void expect_error_at(const std::string& text, std::size_t row, std::size_t column) {
  std::istringstream in(text);
  try {
    read_dataset_csv(in);
    FAIL() << "expected DatasetError for:\n" << text;
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.row(), row) << e.what();
    EXPECT_EQ(e.column(), column) << e.what();
  }
}

TEST(DatasetCsv, MalformedInputReportsPosition) {
  expect_error_at("", 1, 0);
  expect_error_at("a,b\n1,2\n", 1, 0);
  expect_error_at("y,y,a\n1,2,3\n", 1, 2);
  expect_error_at("y\n1\n", 1, 0);
  expect_error_at("y,a\n1,2\n3\n", 3, 0);
  expect_error_at("y,a\n1,2\n3,abc\n", 3, 2);
  expect_error_at("y,a\n1,2\n3,1,5\n", 3, 0);
  expect_error_at("y,a\n1,\n", 2, 2);
  expect_error_at("y,a\n1,nan\n", 2, 2);
  expect_error_at("y,a\n", 1, 0);
}

}  // namespace
}  // namespace rsrnm
