#include "instances.hpp"

#include <algorithm>

namespace diffnet::testing {

int uniform_int(RandomSource& rng, int lo, int hi) {
  const int span = hi - lo + 1;
  return lo + std::min(span - 1, static_cast<int>(rng.uniform01() * span));
}

Mat random_matrix(RandomSource& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

NetworkGraph random_graph(RandomSource& rng, int n, double density, double directed_fraction) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform01() >= density) continue;
      if (rng.uniform01() < directed_fraction) {
        if (rng.uniform01() < 0.5) {
          edges.push_back({u, v, EdgeKind::Directed});
        } else {
          edges.push_back({v, u, EdgeKind::Directed});
        }
      } else {
        edges.push_back({u, v, EdgeKind::Undirected});
      }
    }
  }
  return NetworkGraph(n, std::move(edges));
}

NetworkGraph random_connected_graph(RandomSource& rng, int n, double extra_density) {
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> used(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  for (int v = 1; v < n; ++v) {
    const int u = uniform_int(rng, 0, v - 1);
    edges.push_back({u, v, EdgeKind::Undirected});
    used[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;
  }
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (!used[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] && rng.uniform01() < extra_density) {
        edges.push_back({u, v, EdgeKind::Undirected});
      }
    }
  }
  return NetworkGraph(n, std::move(edges));
}

SubsystemModel random_model(RandomSource& rng, int n, int p, int r) {
  SubsystemModel m;
  m.A = random_matrix(rng, n, n);
  if (n >= 2 && rng.uniform01() < 0.25) {
    // Repeated eigenvalue with a nontrivial Jordan block.
    Mat j = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) j(i, i) = i < 2 ? 0.5 : rng.uniform(-1.0, 1.0);
    j(0, 1) = 1.0;
    Mat s = random_matrix(rng, n, n) + 2.0 * Mat::Identity(n, n);
    m.A = s * j * s.inverse();
  }
  m.B = random_matrix(rng, n, p);
  m.C = random_matrix(rng, r, n);
  return m;
}

DrivenSet random_driven(RandomSource& rng, int n, double prob) {
  std::vector<int> driven;
  for (int v = 0; v < n; ++v) {
    if (rng.uniform01() < prob) driven.push_back(v);
  }
  return DrivenSet(n, driven);
}

AuxDigraph random_aux(RandomSource& rng, int states, int inputs, double density) {
  Pattern h(states, states);
  Pattern p(states, inputs);
  for (int i = 0; i < states; ++i) {
    for (int j = 0; j < states; ++j) h(i, j) = rng.uniform01() < density;
    for (int j = 0; j < inputs; ++j) p(i, j) = rng.uniform01() < density / 2;
  }
  return aux_digraph(h, p);
}

}  // namespace diffnet::testing
