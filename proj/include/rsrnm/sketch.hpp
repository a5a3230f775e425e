#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

namespace rsrnm {

using Index = Eigen::Index;

/// An s x n Gaussian projection with i.i.d. N(0, 1/s) entries.
///
/// Entries are filled in row-major order from the standard-normal stream of
/// Rng(seed).split(draw_index), each scaled by 1/sqrt(s). Instances are
/// immutable and may be shared read-only across threads.
class SketchMatrix {
 public:
  /// Throws std::invalid_argument when s or n is zero.
  static SketchMatrix sample(Index s, Index n, std::uint64_t seed,
                             std::uint64_t draw_index);

  /// Deterministic P = I_n. Not a random draw; only used to reduce RS-RNM
  /// to the full-space method in equivalence checks.
  static SketchMatrix identity(Index n);

  /// Wraps an explicit matrix (test fixtures). Flagged non-random.
  static SketchMatrix from_matrix(Eigen::MatrixXd entries);

  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t draw_index() const { return draw_index_; }
  bool is_random() const { return random_; }
  bool is_identity() const { return identity_; }

  /// P v. Throws std::invalid_argument on length mismatch.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

  /// P^T u. Throws std::invalid_argument on length mismatch.
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& u) const;

  /// The s x s Gram matrix P P^T (exactly symmetric).
  Eigen::MatrixXd gram() const;

  /// ||P P^T||_2 = ||P^T P||_2, the largest eigenvalue of the Gram matrix.
  double gram_norm() const;

 private:
  SketchMatrix(Eigen::MatrixXd entries, std::uint64_t seed,
               std::uint64_t draw_index, bool random, bool identity);

  Eigen::MatrixXd entries_;
  std::uint64_t seed_ = 0;
  std::uint64_t draw_index_ = 0;
  bool random_ = false;
  bool identity_ = false;
};

inline SketchMatrix sample_sketch(Index s, Index n, std::uint64_t seed,
                                  std::uint64_t draw_index) {
  return SketchMatrix::sample(s, n, seed, draw_index);
}

/// Extreme singular values of P^T via the eigenvalues of P P^T.
struct SingularValueBand {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double gram_min = 0.0;  // lambda_min(P P^T)
  double gram_max = 0.0;  // lambda_max(P P^T)
};

SingularValueBand singular_value_band(const SketchMatrix& p);

struct ConcentrationReport {
  Index s = 0;
  Index n = 0;
  std::size_t trials = 0;
  double jl_epsilon = 0.0;
  double jl_success_fraction = 0.0;
  double gram_norm_max = 0.0;
  double gram_norm_mean = 0.0;
  double sigma_min_min = 0.0;
  double sigma_max_max = 0.0;
};

/// Monte Carlo study of JL distortion, Gram norm, and singular values over
/// `trials` independent sketches (trial i uses draw_index i). `test_vector`
/// defaults to e_1 and is normalized before use. `threads` > 1 splits trials
/// across workers; the report does not depend on the thread count.
ConcentrationReport concentration_study(
    Index s, Index n, std::size_t trials, double jl_epsilon, std::uint64_t seed,
    const std::optional<Eigen::VectorXd>& test_vector = std::nullopt,
    unsigned threads = 1);

}  // namespace rsrnm
