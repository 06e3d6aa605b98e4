#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace diffnet {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Thresholds used to turn exact-arithmetic rank statements into numerical
/// decisions.
struct ToleranceConfig {
  /// Singular values at or below rank_rel_tol * sigma_max count as zero.
  double rank_rel_tol = 1e-9;
  /// Absolute radius within which two eigenvalues are treated as equal.
  double eig_match_tol = 1e-7;

  /// Throws std::invalid_argument unless both are positive and rank_rel_tol < 1.
  void validate() const;
};

/// Deterministic pseudo-random stream identified by (seed, stream_id).
///
/// Two sources constructed from the same pair produce the same sequence on
/// every platform: sampling uses the raw 64-bit engine output rather than the
/// implementation-defined standard distributions.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent stream derived from this one's identity (not its state).
  /// Distinct indices give distinct stream ids.
  RandomSource substream(std::uint64_t index) const;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform on [-range, -0.1 range] U [0.1 range, range].
  double away_from_zero(double range = 1.0);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

namespace detail {
Mat kron_dense(const Mat& a, const Mat& b);
CMat kron_dense(const CMat& a, const CMat& b);
}  // namespace detail

/// Evaluates an Eigen expression into the matching dynamic matrix type.
template <typename Derived>
auto to_dense(const Eigen::MatrixBase<Derived>& m) {
  if constexpr (Eigen::NumTraits<typename Derived::Scalar>::IsComplex) {
    return CMat(m);
  } else {
    return Mat(m);
  }
}

/// Block (i, j) of the result is a(i, j) * b.
template <typename DA, typename DB>
auto kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return detail::kron_dense(to_dense(a), to_dense(b));
}

Mat ones(Eigen::Index rows, Eigen::Index cols);
/// i-th column of I_n (0-based).
Mat unit_vector(Eigen::Index n, Eigen::Index i);

/// Permutation matrix stored as an index map: column t has its single one in
/// row image(t).
class Permutation {
 public:
  explicit Permutation(std::vector<Eigen::Index> image);

  Eigen::Index size() const { return static_cast<Eigen::Index>(image_.size()); }
  Eigen::Index image(Eigen::Index t) const { return image_[static_cast<std::size_t>(t)]; }
  const std::vector<Eigen::Index>& images() const { return image_; }

  Mat dense() const;
  Permutation transpose() const;

 private:
  std::vector<Eigen::Index> image_;
};

/// P(m, p) of size mp x mp with P(m,p)^T (A (x) B) P(n,r) = B (x) A for every
/// m x n matrix A and p x r matrix B.
Permutation commutation_matrix(Eigen::Index m, Eigen::Index p);

/// rows^T * x * cols, evaluated by indexing.
Mat permute(const Permutation& rows, const Mat& x, const Permutation& cols);

/// Number of singular values strictly greater than rank_rel_tol * sigma_max.
/// Returns 0 for the zero matrix. Throws DimensionError on an empty matrix and
/// NumericError on non-finite entries.
int numerical_rank(const Mat& m, const ToleranceConfig& tol);
int numerical_rank(const CMat& m, const ToleranceConfig& tol);

template <typename Derived>
int numerical_rank(const Eigen::MatrixBase<Derived>& m, const ToleranceConfig& tol) {
  return numerical_rank(to_dense(m), tol);
}

/// Eigenvalues with multiplicity. Throws DimensionError for non-square input.
std::vector<Complex> eigenvalues(const Mat& a);

struct EigenCluster {
  Complex center;
  int multiplicity = 0;
};

/// Greedy single-linkage grouping: a value joins the first cluster that has a
/// member within `radius`. Cluster centers are member means.
std::vector<EigenCluster> cluster_eigenvalues(std::span<const Complex> values,
                                              double radius);

/// Maximum numerical rank of matfn(s) over `trials` parameter draws, each
/// coordinate sampled by RandomSource::away_from_zero. Draws consume the
/// source sequentially, so t trials are a prefix of t' > t trials.
template <typename MatFn>
int generic_rank(MatFn&& matfn, int num_params, int trials, RandomSource& rng,
                 const ToleranceConfig& tol) {
  if (trials < 1) throw std::invalid_argument("generic_rank: trials must be >= 1");
  if (num_params < 0) throw std::invalid_argument("generic_rank: negative parameter count");
  int best = 0;
  std::vector<double> params(static_cast<std::size_t>(num_params));
  for (int t = 0; t < trials; ++t) {
    for (auto& s : params) s = rng.away_from_zero();
    const auto m = matfn(std::span<const double>(params));
    best = std::max(best, numerical_rank(m, tol));
  }
  return best;
}

struct PbhResult {
  bool holds = true;
  /// One representative per failing eigenvalue cluster.
  std::vector<Complex> deficient_eigs;
  /// Algebraic multiplicity summed over the failing clusters.
  int deficient_multiplicity = 0;
};

/// PBH controllability: rank [lambda I - A, B] = n at every eigenvalue of A.
/// Each eigenvalue cluster is tested once, at its center, in complex
/// arithmetic.
PbhResult pbh_controllable(const Mat& a, const Mat& b, const ToleranceConfig& tol);
/// Dual of pbh_controllable: rank [lambda I - A; C] = n.
PbhResult pbh_observable(const Mat& a, const Mat& c, const ToleranceConfig& tol);

/// [B, AB, ..., A^{n-1} B].
Mat controllability_matrix(const Mat& a, const Mat& b);

/// Dimension of the controllable subspace, grown block by block from B with
/// orthogonal deflation (staircase form). Rank decisions use
/// rank_rel_tol * max(||A||_F, ||B||_F).
int controllable_subspace_dimension(const Mat& a, const Mat& b,
                                    const ToleranceConfig& tol);

}  // namespace diffnet
