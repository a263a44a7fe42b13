#pragma once

#include <string>
#include <vector>

#include "tap/instance.hpp"
#include "tap/oracle.hpp"
#include "tap/rational.hpp"

namespace tap {

enum class Sense { GE, LE, EQ };

struct LpRow {
    std::vector<std::pair<int, Rat>> terms; // (variable, coefficient), variable ids unique
    Sense sense = Sense::GE;
    Rat rhs;
    std::string tag; // short label for dumps and dual lookups
};

// min cost^T x  subject to rows, 0 <= x <= upper (upper optional per variable).
struct LpModel {
    int nvars = 0;
    std::vector<Rat> cost;
    std::vector<bool> has_upper;
    std::vector<Rat> upper;
    std::vector<LpRow> rows;

    int add_var(const Rat& c);                     // x >= 0
    int add_var(const Rat& c, const Rat& ub);      // 0 <= x <= ub
    void add_row(LpRow row);
    std::string dump() const;
};

// A basic optimal solution (a vertex of the feasible region) with exact duals.
// Every solve verifies primal/dual feasibility, complementary slackness and
// strong duality before returning; a violation raises Error(Internal).
struct LpSolution {
    std::vector<Rat> x;
    Rat objective;
    std::vector<Rat> row_dual;     // per row, signed for the original sense
    std::vector<Rat> reduced_cost; // c_j - y^T A_j
    int pivots = 0;
};

LpSolution solve_lp(const LpModel& model);

// ---- model builders -------------------------------------------------------

// Cut rows: for every tree edge f, sum of x over links covering f >= demand
// (default 1).  Variables are the instance links with their costs, 0<=x<=1.
// `allowed` (optional) fixes the other links to zero.
LpModel build_cut_lp(const TapInstance& inst);
LpModel build_cut_lp(const TapInstance& inst, const std::vector<Rat>& demand,
                     const std::vector<char>* allowed = nullptr);

// Cut rows plus, for every branch with fewer than k leaves, a row
// sum of cost_e * x_e over links covering the branch >= tau(branch), where tau
// is the exact optimum cover cost of the branch.
struct KBranchLp {
    LpModel model;
    std::vector<Branch> branches;     // row i + num_edges corresponds to branches[i]
    std::vector<long long> tau;       // exact branch optima
};
KBranchLp build_kbranch_lp(const TapInstance& inst, int k);

// A bunch is a set of one or three tree edges no tree path contains entirely;
// its row demands sum of x over links covering some bunch edge >= (|B|+1)/2.
std::vector<EdgeSet> enumerate_bunches3(const TapInstance& inst);
bool bunch3_valid(const TapInstance& inst, EdgeSet three_edges);

struct Bunch3Lp {
    LpModel model;
    std::vector<EdgeSet> bunches; // row i + num_edges corresponds to bunches[i]
};
Bunch3Lp build_bunch3_lp(const TapInstance& inst);

// Optimal value of the 3-bunch LP by lazy row generation: solve with the cut
// rows, add a violated bunch row, repeat.  Equal to solving the full model.
struct Bunch3Result {
    LpSolution sol;
    std::vector<EdgeSet> active_bunches;
    int rounds = 0;
};
Bunch3Result solve_bunch3_lazy(const TapInstance& inst, int max_rounds = 200);

// ---- structure of extreme points -----------------------------------------

bool is_half_integral(const std::vector<Rat>& x);

// Half-integrality report: links with x outside {0, 1/2, 1}, and root-incident
// links with x outside {0, 1} (those must be integral on spider-shaped
// instances).
struct HalfIntegralReport {
    std::vector<int> violations;   // x_e not in {0, 1/2, 1}
    std::vector<int> r_violations; // e incident to r with x_e not in {0, 1}
    bool pass = false;
};
HalfIntegralReport check_half_integral(const TapInstance& inst, const std::vector<Rat>& x);

// Connected components of the graph formed by positive-mass cross links.
struct CrossComponent {
    std::vector<int> links;  // positive cross links in the component
    int nodes = 0;
    int cycles = 0;          // edges - nodes + 1
    int cycle_length = 0;    // length of the unique cycle when cycles == 1
};
std::vector<CrossComponent> cross_cycle_audit(const TapInstance& inst,
                                              const std::vector<Rat>& x);

// Rewire the positive cross links until their graph is a forest: pick a cycle,
// zero its lightest link and add that mass to the two cycle neighbours (once,
// for a two-cycle of parallel links).  Preserves coverage; the net growth per
// cycle is one lightest-link mass.  Returns the new vector.
std::vector<Rat> eliminate_cross_cycles(const TapInstance& inst, std::vector<Rat> x);

// Minimum-cost cover of `target` by up links.  Solves the up-link Cut-LP and
// reads off the vertex, which is integral because vertical paths form a
// network matrix; that claim is asserted, and a fractional vertex (never seen
// in practice) logs a warning, bumps uplink_fallback_count() and falls back to
// the exact solver.  Infeasible when some target edge has no vertical cover.
ExactResult solve_uplink_cover(const TapInstance& inst, EdgeSet target);

// Number of times solve_uplink_cover had to fall back (process-wide).
int& uplink_fallback_count();

} // namespace tap
