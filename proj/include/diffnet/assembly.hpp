#pragma once

#include <span>
#include <vector>

#include "diffnet/numerics.hpp"
#include "diffnet/subsystem.hpp"
#include "diffnet/topology.hpp"

namespace diffnet {

/// One p x r weight per graph edge, indexed by edge id. An undirected edge is
/// stored once, so W_ij = W_ji holds by construction. p = 1 is the
/// vector-weighted case.
class EdgeWeights {
 public:
  EdgeWeights(int p, int r, std::vector<Mat> per_edge);

  static EdgeWeights zeros(const NetworkGraph& g, int p, int r);

  struct Entry {
    int u = 0;  ///< 0-based
    int v = 0;
    Mat W;
  };
  /// Assigns weights by endpoint pair. Throws InputError for a pair that is
  /// not an edge of g, a pair given twice, or a weight of the wrong shape.
  /// Edges not listed get zero weight.
  static EdgeWeights from_entries(const NetworkGraph& g, int p, int r,
                                  const std::vector<Entry>& entries);

  int p() const { return p_; }
  int r() const { return r_; }
  int num_edges() const { return static_cast<int>(per_edge_.size()); }
  const Mat& operator[](int edge_id) const { return per_edge_[static_cast<std::size_t>(edge_id)]; }
  const std::vector<Mat>& all() const { return per_edge_; }

  /// Column k of the weights as one scalar per edge (requires p == 1).
  Eigen::VectorXd channel(int k) const;

 private:
  int p_;
  int r_;
  std::vector<Mat> per_edge_;
};

/// L_1..L_r with [L_k]_ij = -w_ij^[k] off the diagonal and zero row sums.
/// Requires p == 1.
std::vector<Mat> scalar_laplacians(const NetworkGraph& g, const EdgeWeights& w);

/// Block Laplacian of size Np x Nr: block (i, j) = -W_ij, block (i, i) = sum
/// of the weights entering i. With p == 1 this is the vector-weighted L_g.
Mat weighted_laplacian(const NetworkGraph& g, const EdgeWeights& w);

struct LumpedSystem {
  Mat A_sys;
  Mat B_sys;
  int num_subsystems = 0;
  int state_dim = 0;
  /// Largest relative gap between the independent assembly routes.
  double route_residual = 0.0;
};

/// A_sys = I_N (x) A - sum_k L_k (x) (b c_k), cross-checked against
/// I_N (x) A - (I_N (x) b) L_g (I_N (x) C); B_sys = Delta (x) b.
LumpedSystem assemble_lumped_simo(const SubsystemModel& m, const NetworkGraph& g,
                                  const EdgeWeights& w, const DrivenSet& d);

/// A_sys = I_N (x) A - (I_N (x) B) L_m (I_N (x) C), cross-checked against the
/// edgewise form I_N (x) A + (K (x) B) diag(W_e) (K_I (x) C).
LumpedSystem assemble_lumped_mimo(const SubsystemModel& m, const NetworkGraph& g,
                                  const EdgeWeights& w, const DrivenSet& d);

/// Dispatches on B's column count.
LumpedSystem assemble_lumped(const SubsystemModel& m, const NetworkGraph& g, const EdgeWeights& w,
                             const DrivenSet& d);

/// Relative tolerance the two assembly routes must meet.
inline constexpr double kAssemblyRouteTol = 1e-10;

struct FactorizationResidual {
  double a_residual = 0.0;
  double b_residual = 0.0;
  double max_residual() const { return std::max(a_residual, b_residual); }
};

/// Rebuilds [A_sys, B_sys] from the incidence factorization with diagonal
/// parameter matrices (per-channel Lambda_k for p == 1, per-edge T Lambda Q
/// blocks otherwise) and reports the max elementwise deviation from direct
/// assembly, relative to max(1, max |direct|).
FactorizationResidual factorized_assembly_check(
    const SubsystemModel& m, const NetworkGraph& g, const EdgeWeights& w, const DrivenSet& d,
    OrientationPolicy policy = OrientationPolicy::LowToHigh);

struct TqDecomposition {
  Mat T;       ///< I_p (x) 1_{1 x r}
  Mat Lambda;  ///< diag of W's entries in row-major order
  Mat Q;       ///< 1_{p x 1} (x) I_r
};

TqDecomposition tq_decompose(const Mat& W);

/// Independent draw for every stored edge, entries uniform on
/// [-range, -0.1 range] U [0.1 range, range].
EdgeWeights sample_weights(const NetworkGraph& g, int p, int r, RandomSource& rng,
                           double range = 1.0);

/// A correction added to one subsystem's diagonal block of A_sys.
struct LocalTerm {
  int vertex = 0;  ///< 0-based
  Mat delta_A;
};

void apply_local_terms(LumpedSystem& sys, std::span<const LocalTerm> terms);

struct MassSpringParams {
  int num_masses = 1;
  double mass = 1.0;
  std::vector<double> k;   ///< k_1..k_N; k_1 ties mass 1 to the wall
  std::vector<double> mu;  ///< mu_1..mu_N; mu_1 ties mass 1 to the wall
};

struct MassSpringChain {
  SubsystemModel model;
  NetworkGraph graph;
  EdgeWeights weights;
  DrivenSet driven;       ///< mass 1 driven by default
  double input_gain = 1;  ///< 1/m, folded into B_sys
  LocalTerm grounding;    ///< wall coupling of mass 1
};

/// Chain of N identical masses, state (position, velocity) per mass, with
/// W_{i,i+1} = [k_{i+1}/m, mu_{i+1}/m]. Throws InputError for N < 1,
/// nonpositive mass, or k/mu of the wrong length.
MassSpringChain mass_spring_chain(const MassSpringParams& params);

}  // namespace diffnet
