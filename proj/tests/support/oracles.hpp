#pragma once

#include <vector>

#include "diffnet/assembly.hpp"
#include "diffnet/numerics.hpp"
#include "diffnet/topology.hpp"

namespace diffnet::testing {

/// Kronecker product written straight from the entrywise definition.
Mat naive_kron(const Mat& a, const Mat& b);

/// Every simple cycle of the state subgraph, each listed once from its
/// smallest vertex.
std::vector<std::vector<int>> simple_cycles(const AuxDigraph& dg);

/// True iff every simple cycle contains a state vertex reachable from an
/// input vertex, with reachability recomputed by plain BFS.
bool brute_force_cycles_reachable(const AuxDigraph& dg);

/// A_sys from the node equations x_i' = A x_i + sum_j B W_ij C (x_j - x_i)
/// + delta_i B u_i, block by block.
Mat blockwise_a_sys(const SubsystemModel& m, const NetworkGraph& g, const EdgeWeights& w);
Mat blockwise_b_sys(const SubsystemModel& m, const DrivenSet& d);

/// rank [B, AB, ..., A^{n-1} B] == n.
bool kalman_controllable(const Mat& a, const Mat& b, double rel_tol = 1e-9);

double max_abs(const Mat& m);

}  // namespace diffnet::testing
