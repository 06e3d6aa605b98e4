#include "diffnet/numerics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "diffnet/errors.hpp"

namespace diffnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string dims(Eigen::Index r, Eigen::Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kron_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                            a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

template <typename MatrixType>
int rank_impl(const MatrixType& m, const ToleranceConfig& tol) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw DimensionError("numerical_rank: empty matrix " + dims(m.rows(), m.cols()));
  }
  if (!m.allFinite()) {
    throw NumericError("numerical_rank: non-finite entries in " + dims(m.rows(), m.cols()) +
                       " matrix");
  }
  Eigen::JacobiSVD<MatrixType> svd(m);
  const auto& sv = svd.singularValues();
  if (!sv.allFinite()) {
    throw NumericError("numerical_rank: SVD failed on " + dims(m.rows(), m.cols()) + " matrix");
  }
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  if (largest == 0.0) return 0;
  const double cutoff = tol.rank_rel_tol * largest;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

void require_square(const Mat& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(who) + ": matrix must be square, got " +
                         dims(a.rows(), a.cols()));
  }
}

}  // namespace

void ToleranceConfig::validate() const {
  if (!(rank_rel_tol > 0.0) || !(rank_rel_tol < 1.0)) {
    throw std::invalid_argument("rank_rel_tol must lie in (0, 1)");
  }
  if (!(eig_match_tol > 0.0) || !std::isfinite(eig_match_tol)) {
    throw std::invalid_argument("eig_match_tol must be positive and finite");
  }
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

RandomSource RandomSource::substream(std::uint64_t index) const {
  // Bijective in index for a fixed parent, so siblings never collide.
  return RandomSource(seed_, splitmix64(splitmix64(stream_id_) + index));
}

double RandomSource::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double RandomSource::away_from_zero(double range) {
  const double v = 2.0 * uniform01() - 1.0;
  const double magnitude = range * (0.1 + 0.9 * std::abs(v));
  return v < 0.0 ? -magnitude : magnitude;
}

namespace detail {
Mat kron_dense(const Mat& a, const Mat& b) { return kron_impl(a, b); }
CMat kron_dense(const CMat& a, const CMat& b) { return kron_impl(a, b); }
}  // namespace detail

Mat ones(Eigen::Index rows, Eigen::Index cols) { return Mat::Ones(rows, cols); }

Mat unit_vector(Eigen::Index n, Eigen::Index i) {
  Mat e = Mat::Zero(n, 1);
  e(i, 0) = 1.0;
  return e;
}

Permutation::Permutation(std::vector<Eigen::Index> image) : image_(std::move(image)) {
  std::vector<bool> seen(image_.size(), false);
  for (auto v : image_) {
    if (v < 0 || v >= size() || seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("Permutation: image is not a bijection");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Mat Permutation::dense() const {
  Mat p = Mat::Zero(size(), size());
  for (Eigen::Index t = 0; t < size(); ++t) p(image(t), t) = 1.0;
  return p;
}

Permutation Permutation::transpose() const {
  std::vector<Eigen::Index> inv(image_.size());
  for (Eigen::Index t = 0; t < size(); ++t) inv[static_cast<std::size_t>(image(t))] = t;
  return Permutation(std::move(inv));
}

Permutation commutation_matrix(Eigen::Index m, Eigen::Index p) {
  if (m < 1 || p < 1) throw std::invalid_argument("commutation_matrix: m, p must be >= 1");
  // Row k*m + i of B (x) A is row i*p + k of A (x) B.
  std::vector<Eigen::Index> image(static_cast<std::size_t>(m * p));
  for (Eigen::Index k = 0; k < p; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) {
      image[static_cast<std::size_t>(k * m + i)] = i * p + k;
    }
  }
  return Permutation(std::move(image));
}

Mat permute(const Permutation& rows, const Mat& x, const Permutation& cols) {
  if (rows.size() != x.rows() || cols.size() != x.cols()) {
    throw DimensionError("permute: permutation sizes do not match " + dims(x.rows(), x.cols()));
  }
  Mat out(x.rows(), x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    for (Eigen::Index u = 0; u < x.cols(); ++u) out(t, u) = x(rows.image(t), cols.image(u));
  }
  return out;
}

int numerical_rank(const Mat& m, const ToleranceConfig& tol) { return rank_impl(m, tol); }
int numerical_rank(const CMat& m, const ToleranceConfig& tol) { return rank_impl(m, tol); }

std::vector<Complex> eigenvalues(const Mat& a) {
  require_square(a, "eigenvalues");
  if (a.rows() == 0) return {};
  if (!a.allFinite()) {
    throw NumericError("eigenvalues: non-finite entries in " + dims(a.rows(), a.cols()) +
                       " matrix");
  }
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigenvalues: eigen decomposition failed on " +
                       dims(a.rows(), a.cols()) + " matrix");
  }
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<EigenCluster> cluster_eigenvalues(std::span<const Complex> values, double radius) {
  std::vector<std::vector<Complex>> members;
  for (const auto& v : values) {
    bool placed = false;
    for (auto& cluster : members) {
      for (const auto& w : cluster) {
        if (std::abs(v - w) <= radius) {
          cluster.push_back(v);
          placed = true;
          break;
        }
      }
      if (placed) break;
    }
    if (!placed) members.push_back({v});
  }
  std::vector<EigenCluster> out;
  out.reserve(members.size());
  for (const auto& cluster : members) {
    Complex sum{0.0, 0.0};
    for (const auto& w : cluster) sum += w;
    out.push_back({sum / static_cast<double>(cluster.size()), static_cast<int>(cluster.size())});
  }
  return out;
}

PbhResult pbh_controllable(const Mat& a, const Mat& b, const ToleranceConfig& tol) {
  require_square(a, "pbh_controllable");
  if (b.rows() != a.rows()) {
    throw DimensionError("pbh_controllable: A is " + dims(a.rows(), a.cols()) + " but B is " +
                         dims(b.rows(), b.cols()));
  }
  const Eigen::Index n = a.rows();
  PbhResult result;
  if (n == 0) return result;
  const auto spectrum = eigenvalues(a);
  const CMat ac = a.cast<Complex>();
  const CMat bc = b.cast<Complex>();
  for (const auto& cluster : cluster_eigenvalues(spectrum, tol.eig_match_tol)) {
    CMat m(n, n + b.cols());
    m.leftCols(n) = cluster.center * CMat::Identity(n, n) - ac;
    m.rightCols(b.cols()) = bc;
    if (numerical_rank(m, tol) < n) {
      result.holds = false;
      result.deficient_eigs.push_back(cluster.center);
      result.deficient_multiplicity += cluster.multiplicity;
    }
  }
  return result;
}

PbhResult pbh_observable(const Mat& a, const Mat& c, const ToleranceConfig& tol) {
  require_square(a, "pbh_observable");
  if (c.cols() != a.cols()) {
    throw DimensionError("pbh_observable: A is " + dims(a.rows(), a.cols()) + " but C is " +
                         dims(c.rows(), c.cols()));
  }
  return pbh_controllable(a.transpose(), c.transpose(), tol);
}

Mat controllability_matrix(const Mat& a, const Mat& b) {
  require_square(a, "controllability_matrix");
  if (b.rows() != a.rows()) throw DimensionError("controllability_matrix: B rows != A rows");
  const Eigen::Index n = a.rows();
  Mat out(n, n * b.cols());
  if (n == 0) return out;
  out.leftCols(b.cols()) = b;
  for (Eigen::Index i = 1; i < n; ++i) {
    out.middleCols(i * b.cols(), b.cols()) = a * out.middleCols((i - 1) * b.cols(), b.cols());
  }
  return out;
}

int controllable_subspace_dimension(const Mat& a, const Mat& b, const ToleranceConfig& tol) {
  require_square(a, "controllable_subspace_dimension");
  if (b.rows() != a.rows()) {
    throw DimensionError("controllable_subspace_dimension: B rows != A rows");
  }
  const Eigen::Index n = a.rows();
  const double scale = std::max({a.norm(), b.norm(), std::numeric_limits<double>::min()});
  const double cutoff = tol.rank_rel_tol * scale;

  Mat basis(n, 0);
  Mat candidate = b;
  while (basis.cols() < n && candidate.cols() > 0) {
    candidate -= basis * (basis.transpose() * candidate);
    // Second pass keeps the basis orthonormal to working precision.
    candidate -= basis * (basis.transpose() * candidate);
    Eigen::JacobiSVD<Mat> svd(candidate, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index fresh = 0;
    while (fresh < sv.size() && sv(fresh) > cutoff) ++fresh;
    if (fresh == 0) break;
    fresh = std::min(fresh, n - basis.cols());
    Mat grown(n, basis.cols() + fresh);
    grown << basis, svd.matrixU().leftCols(fresh);
    basis = std::move(grown);
    candidate = a * basis.rightCols(fresh);
  }
  return static_cast<int>(basis.cols());
}

}  // namespace diffnet
