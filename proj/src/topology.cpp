#include "diffnet/topology.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <utility>

#include "diffnet/errors.hpp"

namespace diffnet {

std::string to_string(EdgeKind kind) {
  return kind == EdgeKind::Directed ? "directed" : "undirected";
}

NetworkGraph::NetworkGraph(int num_vertices, std::vector<Edge> edges)
    : num_vertices_(num_vertices), edges_(std::move(edges)) {
  if (num_vertices_ < 1) throw InputError("graph must have at least one vertex");
  std::set<std::pair<int, int>> undirected_pairs;
  std::set<std::pair<int, int>> directed_pairs;
  for (const auto& e : edges_) {
    const auto label = "(" + std::to_string(e.u + 1) + ", " + std::to_string(e.v + 1) + ")";
    if (e.u < 0 || e.v < 0 || e.u >= num_vertices_ || e.v >= num_vertices_) {
      throw InputError("edge " + label + " has an endpoint outside 1.." +
                       std::to_string(num_vertices_));
    }
    if (e.u == e.v) throw InputError("edge " + label + " is a self-loop");
    const auto key = std::minmax(e.u, e.v);
    const std::pair<int, int> unordered{key.first, key.second};
    bool clash = undirected_pairs.count(unordered) > 0;
    if (e.kind == EdgeKind::Undirected) {
      clash = clash || directed_pairs.count({e.u, e.v}) > 0 || directed_pairs.count({e.v, e.u}) > 0;
      undirected_pairs.insert(unordered);
    } else {
      clash = clash || directed_pairs.count({e.u, e.v}) > 0;
      directed_pairs.insert({e.u, e.v});
    }
    if (clash) throw InputError("edge " + label + " duplicates an existing edge on that pair");
  }
}

bool NetworkGraph::has_directed_edges() const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return e.kind == EdgeKind::Directed; });
}

std::optional<int> NetworkGraph::find_edge(int u, int v) const {
  for (int id = 0; id < num_edges(); ++id) {
    const auto& e = edges_[static_cast<std::size_t>(id)];
    if (e.u == u && e.v == v) return id;
    if (e.kind == EdgeKind::Undirected && e.u == v && e.v == u) return id;
  }
  return std::nullopt;
}

std::vector<std::vector<int>> NetworkGraph::successors() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_vertices_));
  for (const auto& e : edges_) {
    out[static_cast<std::size_t>(e.u)].push_back(e.v);
    if (e.kind == EdgeKind::Undirected) out[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  return out;
}

std::vector<std::vector<int>> NetworkGraph::predecessors() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_vertices_));
  for (const auto& e : edges_) {
    out[static_cast<std::size_t>(e.v)].push_back(e.u);
    if (e.kind == EdgeKind::Undirected) out[static_cast<std::size_t>(e.u)].push_back(e.v);
  }
  return out;
}

NetworkGraph NetworkGraph::without_edge(int id) const {
  auto edges = edges_;
  edges.erase(edges.begin() + id);
  return NetworkGraph(num_vertices_, std::move(edges));
}

NetworkGraph make_path_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, EdgeKind::Undirected});
  return NetworkGraph(n, std::move(edges));
}

NetworkGraph make_star_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) edges.push_back({0, i, EdgeKind::Undirected});
  return NetworkGraph(n, std::move(edges));
}

NetworkGraph make_cycle_graph(int n) {
  if (n < 3) throw InputError("a cycle graph needs at least 3 vertices");
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, EdgeKind::Undirected});
  return NetworkGraph(n, std::move(edges));
}

DrivenSet::DrivenSet(int num_vertices, const std::vector<int>& driven)
    : mask_(static_cast<std::size_t>(num_vertices), false) {
  for (int v : driven) {
    if (v < 0 || v >= num_vertices) {
      throw InputError("driven vertex " + std::to_string(v + 1) + " is outside 1.." +
                       std::to_string(num_vertices));
    }
    mask_[static_cast<std::size_t>(v)] = true;
  }
}

int DrivenSet::size() const { return static_cast<int>(std::count(mask_.begin(), mask_.end(), true)); }

std::vector<int> DrivenSet::members() const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v) {
    if (contains(v)) out.push_back(v);
  }
  return out;
}

Mat DrivenSet::delta() const {
  Mat d = Mat::Zero(num_vertices(), num_vertices());
  for (int v = 0; v < num_vertices(); ++v) d(v, v) = contains(v) ? 1.0 : 0.0;
  return d;
}

namespace {

void require_same_size(const NetworkGraph& g, const DrivenSet& d) {
  if (g.num_vertices() != d.num_vertices()) {
    throw DimensionError("driven set covers " + std::to_string(d.num_vertices()) +
                         " vertices but the graph has " + std::to_string(g.num_vertices()));
  }
}

}  // namespace

ForestResult spanning_forest(const NetworkGraph& g, const DrivenSet& d) {
  require_same_size(g, d);
  const auto succ = g.successors();
  SpanningForest forest;
  forest.parent.assign(static_cast<std::size_t>(g.num_vertices()), -1);
  std::vector<bool> seen(static_cast<std::size_t>(g.num_vertices()), false);
  std::deque<int> queue;
  for (int v : d.members()) {
    seen[static_cast<std::size_t>(v)] = true;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    forest.order.push_back(v);
    for (int w : succ[static_cast<std::size_t>(v)]) {
      if (seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = true;
      forest.parent[static_cast<std::size_t>(w)] = v;
      queue.push_back(w);
    }
  }
  ForestResult result;
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (!seen[static_cast<std::size_t>(v)]) result.unreachable.push_back(v);
  }
  if (result.unreachable.empty()) result.forest = std::move(forest);
  return result;
}

std::vector<int> input_reachable_set(const NetworkGraph& g, const DrivenSet& d) {
  const auto res = spanning_forest(g, d);
  if (res.ok()) {
    std::vector<int> all(static_cast<std::size_t>(g.num_vertices()));
    for (int v = 0; v < g.num_vertices(); ++v) all[static_cast<std::size_t>(v)] = v;
    return all;
  }
  std::vector<int> out;
  std::size_t k = 0;
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (k < res.unreachable.size() && res.unreachable[k] == v) {
      ++k;
    } else {
      out.push_back(v);
    }
  }
  return out;
}

bool is_globally_input_reachable(const NetworkGraph& g, const DrivenSet& d) {
  return spanning_forest(g, d).ok();
}

IncidenceRealization incidence_matrices(const NetworkGraph& g, OrientationPolicy policy) {
  IncidenceRealization inc;
  inc.policy = policy;
  const int m = g.num_edges();
  inc.K_I = Mat::Zero(m, g.num_vertices());
  inc.K = Mat::Zero(g.num_vertices(), m);
  for (int j = 0; j < m; ++j) {
    const auto& e = g.edge(j);
    OrientedEdge oe{e.u, e.v, e.kind};
    if (e.kind == EdgeKind::Undirected && policy == OrientationPolicy::LowToHigh) {
      oe.tail = std::min(e.u, e.v);
      oe.head = std::max(e.u, e.v);
    }
    inc.edge_order.push_back(j);
    inc.orientation.push_back(oe);
    inc.K_I(j, oe.tail) = 1.0;
    inc.K_I(j, oe.head) = -1.0;
    inc.K(oe.head, j) = 1.0;
    if (e.kind == EdgeKind::Undirected) {
      inc.K(oe.tail, j) = -1.0;
      inc.k_case.push_back(KCase::Undirected);
    } else {
      inc.k_case.push_back(KCase::Directed);
    }
  }
  return inc;
}

Mat laplacian_from_incidence(const IncidenceRealization& inc, const Eigen::VectorXd& weights) {
  if (weights.size() != inc.K_I.rows()) {
    throw DimensionError("laplacian_from_incidence: expected " + std::to_string(inc.K_I.rows()) +
                         " edge weights, got " + std::to_string(weights.size()));
  }
  return -inc.K * weights.asDiagonal() * inc.K_I;
}

Pattern pattern_of(const Mat& m, double zero_tol) { return m.array().abs() > zero_tol; }

bool AuxDigraph::has_edge(int from_state, int to_state) const {
  const auto& succ = state_successors[static_cast<std::size_t>(from_state)];
  return std::find(succ.begin(), succ.end(), to_state) != succ.end();
}

AuxDigraph aux_digraph(const Pattern& h, const Pattern& p) {
  if (h.rows() != h.cols()) throw DimensionError("aux_digraph: H pattern must be square");
  if (p.rows() != h.rows()) {
    throw DimensionError("aux_digraph: P pattern has " + std::to_string(p.rows()) +
                         " rows, H has " + std::to_string(h.rows()));
  }
  AuxDigraph dg;
  dg.num_state = static_cast<int>(h.rows());
  dg.num_input = static_cast<int>(p.cols());
  dg.state_successors.resize(static_cast<std::size_t>(dg.num_state));
  dg.input_successors.resize(static_cast<std::size_t>(dg.num_input));
  for (int i = 0; i < dg.num_state; ++i) {
    for (int j = 0; j < dg.num_state; ++j) {
      if (h(j, i)) dg.state_successors[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  for (int i = 0; i < dg.num_input; ++i) {
    for (int j = 0; j < dg.num_state; ++j) {
      if (p(j, i)) dg.input_successors[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  return dg;
}

std::vector<bool> aux_input_reachable(const AuxDigraph& dg) {
  std::vector<bool> reached(static_cast<std::size_t>(dg.num_state), false);
  std::deque<int> queue;
  for (const auto& succ : dg.input_successors) {
    for (int v : succ) {
      if (!reached[static_cast<std::size_t>(v)]) {
        reached[static_cast<std::size_t>(v)] = true;
        queue.push_back(v);
      }
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : dg.state_successors[static_cast<std::size_t>(v)]) {
      if (!reached[static_cast<std::size_t>(w)]) {
        reached[static_cast<std::size_t>(w)] = true;
        queue.push_back(w);
      }
    }
  }
  return reached;
}

CycleCheck all_cycles_input_reachable(const AuxDigraph& dg) {
  const auto reached = aux_input_reachable(dg);
  enum class Color { White, Gray, Black };
  std::vector<Color> color(static_cast<std::size_t>(dg.num_state), Color::White);
  std::vector<int> stack_path;

  // Iterative DFS over unreachable vertices; a gray successor closes a cycle.
  for (int root = 0; root < dg.num_state; ++root) {
    if (reached[static_cast<std::size_t>(root)] || color[static_cast<std::size_t>(root)] != Color::White) {
      continue;
    }
    std::vector<std::pair<int, std::size_t>> frames{{root, 0}};
    color[static_cast<std::size_t>(root)] = Color::Gray;
    stack_path.assign(1, root);
    while (!frames.empty()) {
      auto& [v, next] = frames.back();
      const auto& succ = dg.state_successors[static_cast<std::size_t>(v)];
      if (next == succ.size()) {
        color[static_cast<std::size_t>(v)] = Color::Black;
        frames.pop_back();
        stack_path.pop_back();
        continue;
      }
      const int w = succ[next++];
      if (reached[static_cast<std::size_t>(w)]) continue;
      if (color[static_cast<std::size_t>(w)] == Color::Gray) {
        CycleCheck out;
        out.holds = false;
        const auto start = std::find(stack_path.begin(), stack_path.end(), w);
        out.witness_cycle.assign(start, stack_path.end());
        return out;
      }
      if (color[static_cast<std::size_t>(w)] == Color::White) {
        color[static_cast<std::size_t>(w)] = Color::Gray;
        stack_path.push_back(w);
        frames.emplace_back(w, 0);
      }
    }
  }
  return {};
}

}  // namespace diffnet
