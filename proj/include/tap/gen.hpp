#pragma once

#include <cstdint>
#include <string>

#include "tap/instance.hpp"

namespace tap {

// Instance families for benchmarks and the test suites.
//   RandomTree      : uniform random recursive tree, links between random pairs
//   Star            : root plus n-1 leaves, every leaf pair linked
//   Caterpillar     : a spine path with leaves hanging off random spine nodes
//   Spider          : random tree whose links are up links and cross links only
//   BoundedDiameter : random tree of diameter at most `diameter`
enum class Profile { RandomTree, Star, Caterpillar, Spider, BoundedDiameter };

// Name round trip ("random-tree", "star", "caterpillar", "spider",
// "bounded-diameter"); Malformed on an unknown name.
Profile profile_from_name(const std::string& name);
std::string profile_name(Profile profile);

struct GenOptions {
    Profile profile = Profile::RandomTree;
    int n = 10;             // nodes, 2..kMaxNodes
    int num_links = -1;     // random link draws before repair; -1 means 2*n
    int diameter = 5;       // BoundedDiameter only, >= 1
    long long max_cost = 1; // costs drawn uniformly from 1..max_cost
};

// Deterministic: the same (seed, options) always produce the same instance,
// byte for byte.  Node ids are 0..n-1 with root 0.  Every instance is
// feasible: uncoverable tree edges are repaired with a link to the root (an up
// link, so the spider profile stays spider-shaped).  Duplicate node pairs are
// drawn at most once.
TapInstance generate(std::uint64_t seed, const GenOptions& opts);

} // namespace tap
