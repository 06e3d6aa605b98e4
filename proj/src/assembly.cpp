#include "diffnet/assembly.hpp"

#include <algorithm>
#include <string>

#include "diffnet/errors.hpp"

namespace diffnet {

namespace {

void require_shape(const SubsystemModel& m) {
  for (const auto& v : validate_model(m)) {
    if (v.code != "zero_output_channel") throw InputError("invalid subsystem model: " + v.message);
  }
}

void require_conforming(const SubsystemModel& m, const NetworkGraph& g, const EdgeWeights& w,
                        const DrivenSet& d) {
  require_shape(m);
  if (w.num_edges() != g.num_edges()) {
    throw DimensionError("weights cover " + std::to_string(w.num_edges()) +
                         " edges but the graph has " + std::to_string(g.num_edges()));
  }
  if (w.p() != m.input_dim() || w.r() != m.output_dim()) {
    throw DimensionError("weights are " + std::to_string(w.p()) + "x" + std::to_string(w.r()) +
                         " but the subsystem needs " + std::to_string(m.input_dim()) + "x" +
                         std::to_string(m.output_dim()) + " (inputs x output channels)");
  }
  if (d.num_vertices() != g.num_vertices()) {
    throw DimensionError("driven set size does not match the graph");
  }
}

double relative_gap(const Mat& reference, const Mat& other) {
  if (reference.size() == 0) return 0.0;
  const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
  return (reference - other).cwiseAbs().maxCoeff() / scale;
}

Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

Mat block_diagonal(const std::vector<Mat>& blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

void check_routes(const LumpedSystem& sys, const char* who) {
  if (!(sys.route_residual <= kAssemblyRouteTol)) {
    throw NumericError(std::string(who) + ": assembly routes disagree (relative gap " +
                       std::to_string(sys.route_residual) + ")");
  }
}

}  // namespace

EdgeWeights::EdgeWeights(int p, int r, std::vector<Mat> per_edge)
    : p_(p), r_(r), per_edge_(std::move(per_edge)) {
  if (p_ < 1 || r_ < 1) throw DimensionError("weight shape must be at least 1x1");
  for (const auto& W : per_edge_) {
    if (W.rows() != p_ || W.cols() != r_) {
      throw DimensionError("edge weight is " + std::to_string(W.rows()) + "x" +
                           std::to_string(W.cols()) + ", expected " + std::to_string(p_) + "x" +
                           std::to_string(r_));
    }
    if (!W.allFinite()) throw InputError("edge weight contains non-finite entries");
  }
}

EdgeWeights EdgeWeights::zeros(const NetworkGraph& g, int p, int r) {
  return EdgeWeights(p, r, std::vector<Mat>(static_cast<std::size_t>(g.num_edges()), Mat::Zero(p, r)));
}

EdgeWeights EdgeWeights::from_entries(const NetworkGraph& g, int p, int r,
                                      const std::vector<Entry>& entries) {
  std::vector<Mat> per_edge(static_cast<std::size_t>(g.num_edges()), Mat::Zero(p, r));
  std::vector<bool> assigned(per_edge.size(), false);
  for (const auto& e : entries) {
    const auto label = "(" + std::to_string(e.u + 1) + ", " + std::to_string(e.v + 1) + ")";
    const auto id = g.find_edge(e.u, e.v);
    if (!id) throw InputError("weight given for " + label + ", which is not an edge of the graph");
    if (assigned[static_cast<std::size_t>(*id)]) throw InputError("weight for " + label + " given twice");
    if (e.W.rows() != p || e.W.cols() != r) {
      throw InputError("weight for " + label + " is " + std::to_string(e.W.rows()) + "x" +
                       std::to_string(e.W.cols()) + ", expected " + std::to_string(p) + "x" +
                       std::to_string(r));
    }
    per_edge[static_cast<std::size_t>(*id)] = e.W;
    assigned[static_cast<std::size_t>(*id)] = true;
  }
  return EdgeWeights(p, r, std::move(per_edge));
}

Eigen::VectorXd EdgeWeights::channel(int k) const {
  if (p_ != 1) throw DimensionError("channel(): only defined for vector weights (p == 1)");
  Eigen::VectorXd out(num_edges());
  for (int e = 0; e < num_edges(); ++e) out(e) = per_edge_[static_cast<std::size_t>(e)](0, k);
  return out;
}

std::vector<Mat> scalar_laplacians(const NetworkGraph& g, const EdgeWeights& w) {
  if (w.p() != 1) throw DimensionError("scalar_laplacians: weights must be 1 x r");
  if (w.num_edges() != g.num_edges()) throw DimensionError("scalar_laplacians: weight count mismatch");
  const int n = g.num_vertices();
  std::vector<Mat> out(static_cast<std::size_t>(w.r()), Mat::Zero(n, n));
  for (int id = 0; id < g.num_edges(); ++id) {
    const auto& e = g.edge(id);
    for (int k = 0; k < w.r(); ++k) {
      auto& L = out[static_cast<std::size_t>(k)];
      const double wk = w[id](0, k);
      L(e.v, e.u) -= wk;
      L(e.v, e.v) += wk;
      if (e.kind == EdgeKind::Undirected) {
        L(e.u, e.v) -= wk;
        L(e.u, e.u) += wk;
      }
    }
  }
  return out;
}

Mat weighted_laplacian(const NetworkGraph& g, const EdgeWeights& w) {
  if (w.num_edges() != g.num_edges()) throw DimensionError("weighted_laplacian: weight count mismatch");
  const int n = g.num_vertices();
  const int p = w.p();
  const int r = w.r();
  Mat L = Mat::Zero(n * p, n * r);
  auto block = [&](int i, int j) { return L.block(i * p, j * r, p, r); };
  for (int id = 0; id < g.num_edges(); ++id) {
    const auto& e = g.edge(id);
    block(e.v, e.u) -= w[id];
    block(e.v, e.v) += w[id];
    if (e.kind == EdgeKind::Undirected) {
      block(e.u, e.v) -= w[id];
      block(e.u, e.u) += w[id];
    }
  }
  return L;
}

LumpedSystem assemble_lumped_simo(const SubsystemModel& m, const NetworkGraph& g,
                                  const EdgeWeights& w, const DrivenSet& d) {
  require_conforming(m, g, w, d);
  if (m.input_dim() != 1) throw DimensionError("assemble_lumped_simo: B must have one column");
  const int N = g.num_vertices();
  const Mat base = kron(identity(N), m.A);

  LumpedSystem sys;
  sys.num_subsystems = N;
  sys.state_dim = static_cast<int>(m.state_dim());
  sys.A_sys = base;
  const auto Ls = scalar_laplacians(g, w);
  for (Eigen::Index k = 0; k < m.output_dim(); ++k) {
    sys.A_sys -= kron(Ls[static_cast<std::size_t>(k)], m.B * m.C.row(k));
  }
  const Mat via_block = base - kron(identity(N), m.B) * weighted_laplacian(g, w) * kron(identity(N), m.C);
  sys.route_residual = relative_gap(sys.A_sys, via_block);
  sys.B_sys = kron(d.delta(), m.B);
  check_routes(sys, "assemble_lumped_simo");
  return sys;
}

LumpedSystem assemble_lumped_mimo(const SubsystemModel& m, const NetworkGraph& g,
                                  const EdgeWeights& w, const DrivenSet& d) {
  require_conforming(m, g, w, d);
  const int N = g.num_vertices();
  const Mat base = kron(identity(N), m.A);

  LumpedSystem sys;
  sys.num_subsystems = N;
  sys.state_dim = static_cast<int>(m.state_dim());
  sys.A_sys = base - kron(identity(N), m.B) * weighted_laplacian(g, w) * kron(identity(N), m.C);

  const auto inc = incidence_matrices(g);
  Mat edgewise = base;
  if (g.num_edges() > 0) {
    edgewise += kron(inc.K, m.B) * block_diagonal(w.all()) * kron(inc.K_I, m.C);
  }
  sys.route_residual = relative_gap(sys.A_sys, edgewise);
  sys.B_sys = kron(d.delta(), m.B);
  check_routes(sys, "assemble_lumped_mimo");
  return sys;
}

LumpedSystem assemble_lumped(const SubsystemModel& m, const NetworkGraph& g, const EdgeWeights& w,
                             const DrivenSet& d) {
  return m.input_dim() == 1 ? assemble_lumped_simo(m, g, w, d) : assemble_lumped_mimo(m, g, w, d);
}

TqDecomposition tq_decompose(const Mat& W) {
  const Eigen::Index p = W.rows();
  const Eigen::Index r = W.cols();
  TqDecomposition out;
  out.T = kron(identity(p), ones(1, r));
  out.Q = kron(ones(p, 1), identity(r));
  out.Lambda = Mat::Zero(p * r, p * r);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) out.Lambda(i * r + j, i * r + j) = W(i, j);
  }
  return out;
}

FactorizationResidual factorized_assembly_check(const SubsystemModel& m, const NetworkGraph& g,
                                                const EdgeWeights& w, const DrivenSet& d,
                                                OrientationPolicy policy) {
  const auto direct = assemble_lumped(m, g, w, d);
  const int N = g.num_vertices();
  const auto n = m.state_dim();
  const int E = g.num_edges();
  FactorizationResidual out;
  const Mat base_a = kron(identity(N), m.A);
  const Mat base_b = kron(d.delta(), m.B);
  if (E == 0) {
    out.a_residual = relative_gap(direct.A_sys, base_a);
    out.b_residual = relative_gap(direct.B_sys, base_b);
    return out;
  }
  const auto inc = incidence_matrices(g, policy);

  // Per-edge T Lambda Q parameterization, valid for any p.
  {
    const auto p = m.input_dim();
    const auto r = m.output_dim();
    std::vector<Mat> lambdas;
    lambdas.reserve(static_cast<std::size_t>(E));
    for (int e : inc.edge_order) lambdas.push_back(tq_decompose(w[e]).Lambda);
    const auto tq = tq_decompose(Mat::Zero(p, r));
    const Mat a_sys = base_a + kron(identity(N), m.B) * kron(inc.K, tq.T) * block_diagonal(lambdas) *
                                   kron(inc.K_I, tq.Q) * kron(identity(N), m.C);
    out.a_residual = relative_gap(direct.A_sys, a_sys);
    out.b_residual = relative_gap(direct.B_sys, base_b);
  }

  if (m.input_dim() == 1) {
    // [A_sys, B_sys] = [I (x) A, Delta (x) b]
    //   + [K (x) b, ..., K (x) b] diag(Lambda_1..Lambda_r) [col(K_I (x) c_k), 0]
    const auto r = m.output_dim();
    Mat left(N * n, r * E);
    Mat right = Mat::Zero(r * E, N * n + N);
    std::vector<Mat> lambdas;
    for (Eigen::Index k = 0; k < r; ++k) {
      left.middleCols(k * E, E) = kron(inc.K, m.B);
      right.block(k * E, 0, E, N * n) = kron(inc.K_I, Mat(m.C.row(k)));
      Eigen::VectorXd diag(E);
      for (int j = 0; j < E; ++j) diag(j) = w[inc.edge_order[static_cast<std::size_t>(j)]](0, k);
      lambdas.push_back(diag.asDiagonal());
    }
    Mat stacked(N * n, N * n + N);
    stacked << base_a, base_b;
    stacked += left * block_diagonal(lambdas) * right;
    out.a_residual = std::max(out.a_residual, relative_gap(direct.A_sys, stacked.leftCols(N * n)));
    out.b_residual = std::max(out.b_residual, relative_gap(direct.B_sys, stacked.rightCols(N)));
  }
  return out;
}

EdgeWeights sample_weights(const NetworkGraph& g, int p, int r, RandomSource& rng, double range) {
  std::vector<Mat> per_edge;
  per_edge.reserve(static_cast<std::size_t>(g.num_edges()));
  for (int e = 0; e < g.num_edges(); ++e) {
    Mat W(p, r);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < r; ++j) W(i, j) = rng.away_from_zero(range);
    }
    per_edge.push_back(std::move(W));
  }
  return EdgeWeights(p, r, std::move(per_edge));
}

void apply_local_terms(LumpedSystem& sys, std::span<const LocalTerm> terms) {
  const int n = sys.state_dim;
  for (const auto& t : terms) {
    if (t.vertex < 0 || t.vertex >= sys.num_subsystems) {
      throw InputError("local term targets vertex " + std::to_string(t.vertex + 1) +
                       ", outside 1.." + std::to_string(sys.num_subsystems));
    }
    if (t.delta_A.rows() != n || t.delta_A.cols() != n) {
      throw DimensionError("local term must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    sys.A_sys.block(t.vertex * n, t.vertex * n, n, n) += t.delta_A;
  }
}

MassSpringChain mass_spring_chain(const MassSpringParams& params) {
  const int N = params.num_masses;
  if (N < 1) throw InputError("mass-spring chain needs at least one mass");
  if (!(params.mass > 0.0)) throw InputError("mass must be positive");
  if (static_cast<int>(params.k.size()) != N || static_cast<int>(params.mu.size()) != N) {
    throw InputError("k and mu must each list " + std::to_string(N) + " constants");
  }
  const double m = params.mass;

  SubsystemModel model;
  model.A = (Mat(2, 2) << 0, 1, 0, 0).finished();
  model.B = (Mat(2, 1) << 0, 1).finished();
  model.C = identity(2);

  auto graph = make_path_graph(N);
  std::vector<Mat> per_edge;
  for (int i = 0; i + 1 < N; ++i) {
    const auto next = static_cast<std::size_t>(i + 1);
    per_edge.push_back((Mat(1, 2) << params.k[next] / m, params.mu[next] / m).finished());
  }
  EdgeWeights weights(1, 2, std::move(per_edge));

  LocalTerm grounding;
  grounding.vertex = 0;
  grounding.delta_A = (Mat(2, 2) << 0, 0, -params.k[0] / m, -params.mu[0] / m).finished();

  return MassSpringChain{std::move(model), graph, std::move(weights), DrivenSet(N, {0}), 1.0 / m,
                         std::move(grounding)};
}

}  // namespace diffnet
