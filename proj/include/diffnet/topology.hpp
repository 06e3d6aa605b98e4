#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diffnet/numerics.hpp"

namespace diffnet {

enum class EdgeKind { Undirected, Directed };

std::string to_string(EdgeKind kind);

/// Edge between 0-based vertices. A directed edge u -> v means vertex v is
/// influenced by vertex u (row v of the Laplacian carries the weight).
struct Edge {
  int u = 0;
  int v = 0;
  EdgeKind kind = EdgeKind::Undirected;
};

/// Interconnection topology. Vertices are 0-based here; file formats and
/// reports use 1-based ids.
class NetworkGraph {
 public:
  /// Throws InputError on out-of-range endpoints, self-loops, or a second
  /// edge on a vertex pair that already carries one (two directed edges in
  /// opposite directions are allowed).
  NetworkGraph(int num_vertices, std::vector<Edge> edges);

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int id) const { return edges_[static_cast<std::size_t>(id)]; }
  bool has_directed_edges() const;

  /// Edge id joining u and v: any undirected edge on {u, v}, or a directed
  /// edge u -> v.
  std::optional<int> find_edge(int u, int v) const;

  /// For each vertex, the vertices it passes information to.
  std::vector<std::vector<int>> successors() const;
  /// For each vertex, the vertices it receives information from.
  std::vector<std::vector<int>> predecessors() const;

  NetworkGraph without_edge(int id) const;

 private:
  int num_vertices_;
  std::vector<Edge> edges_;
};

NetworkGraph make_path_graph(int n);
NetworkGraph make_star_graph(int n);  ///< vertex 0 is the center
NetworkGraph make_cycle_graph(int n);

/// The vertices receiving external input (Delta = diag(delta_i)).
class DrivenSet {
 public:
  /// Throws InputError when an id is outside [0, num_vertices).
  DrivenSet(int num_vertices, const std::vector<int>& driven);

  int num_vertices() const { return static_cast<int>(mask_.size()); }
  bool contains(int v) const { return mask_[static_cast<std::size_t>(v)]; }
  int size() const;
  bool empty() const { return size() == 0; }
  std::vector<int> members() const;
  Mat delta() const;

 private:
  std::vector<bool> mask_;
};

/// Vertices reachable from the driven set, following directed edges forward
/// and undirected edges both ways. Sorted ascending.
std::vector<int> input_reachable_set(const NetworkGraph& g, const DrivenSet& d);
bool is_globally_input_reachable(const NetworkGraph& g, const DrivenSet& d);

struct SpanningForest {
  /// parent[v] is the tree parent of v, or -1 for a root (driven vertex).
  std::vector<int> parent;
  /// Breadth-first visiting order; every parent precedes its children.
  std::vector<int> order;
};

struct ForestResult {
  std::optional<SpanningForest> forest;
  /// Empty on success.
  std::vector<int> unreachable;

  bool ok() const { return forest.has_value(); }
};

/// Breadth-first forest rooted at the driven vertices, or the unreachable
/// vertices when some vertex cannot be reached.
ForestResult spanning_forest(const NetworkGraph& g, const DrivenSet& d);

enum class OrientationPolicy {
  LowToHigh,  ///< undirected {u, v} oriented min -> max
  AsListed,   ///< undirected (u, v) oriented u -> v as stored
};

/// How column j of K was built.
enum class KCase {
  Undirected,  ///< K column = -(K_I row)^T
  Directed,    ///< only the head vertex carries +1
};

struct OrientedEdge {
  int tail = 0;
  int head = 0;
  EdgeKind kind = EdgeKind::Undirected;
};

/// Incidence factorization L = -K * Lambda * K_I for any diagonal Lambda of
/// edge weights listed in edge_order.
struct IncidenceRealization {
  OrientationPolicy policy = OrientationPolicy::LowToHigh;
  std::vector<int> edge_order;
  std::vector<OrientedEdge> orientation;  ///< indexed like edge_order
  std::vector<KCase> k_case;              ///< indexed like edge_order
  Mat K_I;                                ///< |E| x N
  Mat K;                                  ///< N x |E|
};

IncidenceRealization incidence_matrices(const NetworkGraph& g,
                                        OrientationPolicy policy = OrientationPolicy::LowToHigh);

/// -K diag(weights) K_I.
Mat laplacian_from_incidence(const IncidenceRealization& inc, const Eigen::VectorXd& weights);

using Pattern = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Entries with |value| > zero_tol.
Pattern pattern_of(const Mat& m, double zero_tol = 0.0);

/// Auxiliary digraph of (H, P): state vertex v_i -> v_j iff H(j, i) != 0,
/// input vertex u_i -> v_j iff P(j, i) != 0.
struct AuxDigraph {
  int num_state = 0;
  int num_input = 0;
  std::vector<std::vector<int>> state_successors;
  std::vector<std::vector<int>> input_successors;

  bool has_edge(int from_state, int to_state) const;
};

/// Throws DimensionError unless H is square and P has as many rows as H.
AuxDigraph aux_digraph(const Pattern& h, const Pattern& p);

struct CycleCheck {
  bool holds = true;
  /// State vertices of one cycle with no input-reachable member, in cycle
  /// order (a self-loop gives a single vertex). Empty when holds.
  std::vector<int> witness_cycle;
};

/// True iff every cycle contains an input-reachable vertex, equivalently the
/// subgraph on unreachable state vertices is acyclic.
CycleCheck all_cycles_input_reachable(const AuxDigraph& dg);

/// State vertices reachable from some input vertex, as a mask.
std::vector<bool> aux_input_reachable(const AuxDigraph& dg);

}  // namespace diffnet
