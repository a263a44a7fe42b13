#pragma once

#include <vector>

#include "tap/caps.hpp"
#include "tap/instance.hpp"

namespace tap {

struct ExactResult {
    long long cost = 0;
    std::vector<int> links; // ascending ids; lexicographically first optimum
};

// True when the given links cover every edge of `target`.
bool covers(const TapInstance& inst, const std::vector<int>& links, EdgeSet target);

// Exact minimum-cost cover of the edges in `target` (other edges are free),
// optionally restricted to the `allowed` link ids (nullptr = all links).
// Edges with identical covering-link sets collapse into one constraint; the
// memoized branch-and-cover runs over those constraint classes, so the cap is
// on distinct classes, not nodes.  Infeasible if some target edge is
// uncoverable; CapExceeded beyond `max_classes` classes.
ExactResult solve_exact_subset(const TapInstance& inst, EdgeSet target,
                               int max_classes = caps().max_classes,
                               const std::vector<int>* allowed = nullptr);

// Exact optimum for the whole instance.
ExactResult solve_exact(const TapInstance& inst, int max_classes = caps().max_classes);

// Removal of every non-root node with exactly one child.  The two tree edges
// at such a node merge; links incident to removed nodes are dropped, which
// preserves the optimum only when the instance is metric-complete (every node
// pair linked at its cheapest path-cover price), so complete first.  The
// result has at most 2*leaves - 1 tree edges.
struct ShortcutResult {
    TapInstance inst;
    std::vector<int> src_node; // new node index -> old node index
    std::vector<int> src_link; // new link id -> old link id
};
ShortcutResult shortcut_degree2(const TapInstance& inst);

// Exact optimum for a branch: contract everything outside it, complete the
// piece to metric costs, shortcut degree-2 nodes, solve exactly, and expand
// back to original link ids.  Agrees with solve_exact_subset(b.edges) in cost
// while staying insensitive to long induced paths.  Infeasible if some branch
// edge is uncoverable.
ExactResult solve_branch(const TapInstance& inst, const Branch& b,
                         int max_classes = caps().max_classes);

// Exact minimum-cost cover of `target` using up links only (links whose tree
// path is vertical).  Solved by a reach DP over the tree, so no class cap
// applies.  Infeasible when some target edge has no vertical cover.  This is
// the combinatorial cross-check for lp-engine's solve_uplink_cover.
ExactResult uplink_cover_dp(const TapInstance& inst, EdgeSet target);

} // namespace tap
