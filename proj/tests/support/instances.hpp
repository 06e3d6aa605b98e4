#pragma once

#include <vector>

#include "diffnet/assembly.hpp"
#include "diffnet/numerics.hpp"
#include "diffnet/subsystem.hpp"
#include "diffnet/topology.hpp"

namespace diffnet::testing {

int uniform_int(RandomSource& rng, int lo, int hi);  // inclusive
Mat random_matrix(RandomSource& rng, Eigen::Index rows, Eigen::Index cols);

/// Each unordered pair becomes an edge with probability `density`; with
/// `directed_fraction` > 0 some of them are directed in a random direction.
NetworkGraph random_graph(RandomSource& rng, int n, double density, double directed_fraction = 0.0);

/// Random spanning tree plus extra undirected edges.
NetworkGraph random_connected_graph(RandomSource& rng, int n, double extra_density);

/// Random (A, B, C) with every row of C nonzero. A is sometimes given a
/// repeated eigenvalue.
SubsystemModel random_model(RandomSource& rng, int n, int p, int r);

DrivenSet random_driven(RandomSource& rng, int n, double prob);

/// Random pattern digraph for cycle checks.
AuxDigraph random_aux(RandomSource& rng, int states, int inputs, double density);

}  // namespace diffnet::testing
