#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tap/instance.hpp"
#include "tap/lp.hpp"
#include "tap/oracle.hpp"
#include "tap/rational.hpp"

namespace tap {

// The bounded-cost pipeline: round a Cut-LP / k-branch-LP point into an
// integral cover whose cost is certified against the fractional value, or
// produce a violated branch inequality for the lazy driver to add.

enum class CostMode { General, Unit };

struct PipelineParams {
    int k = 6;
    Rat lambda = Rat(2);
    CostMode mode = CostMode::General;
};

// rho(mode): 12/7 for general costs, 8/5 for unit costs.
Rat rho(CostMode mode);

// rho + (8/3)*lambda*M/(k - lambda*M) + 2/lambda.  Requires k > lambda*M.
Rat pipeline_bound(const PipelineParams& params, long long max_cost);

// A branch inequality sum_{e in psi(B)} c_e x_e >= tau(B) violated by the
// current point: lhs < rhs exactly.
struct ViolatedBranch {
    Branch branch;
    Rat lhs;
    long long rhs = 0;
};

// Either a cover (links + cost) or a violated branch inequality.
struct RoundingOutcome {
    std::vector<int> links;
    long long cost = 0;
    std::optional<ViolatedBranch> violated;
};

// Split the tree edges into lambda-thin (x(psi(f)) <= lambda) and lambda-thick
// (x(psi(f)) > lambda) sets.  Exact rational comparison per edge.
std::pair<EdgeSet, EdgeSet> thin_thick_partition(const TapInstance& inst,
                                                 const std::vector<Rat>& x,
                                                 const Rat& lambda);

// Cover the lambda-thick edge set F': split every link covering F' into its
// two up-shadows and run the up-link cover on F'.  Cost is asserted to be at
// most (2/lambda) * c^T x.  Links covering no F' edge are ignored.
std::vector<int> cover_thick(const TapInstance& inst, const std::vector<Rat>& x,
                             const Rat& lambda, EdgeSet thick);

// An inclusionwise minimal complete rooted subtree with >= k leaves whose
// parent edge is lambda-thin (or which is rooted at the tree root).  When the
// whole tree has < k leaves it is returned with small_case set.
struct SubtreeChoice {
    int top = 0;          // node whose complete subtree was chosen
    bool small_case = false;
};
SubtreeChoice find_min_k_lambda_subtree(const TapInstance& inst,
                                        const std::vector<Rat>& x, int k,
                                        const Rat& lambda);

// First rounding: solve every branch hanging on the root exactly.  If some
// branch inequality is violated by x, report the first one (by child index);
// otherwise return the union of the branch optima, of cost at most
// C^in + 2*C^cr + C^r (asserted).  Precondition (not checked): every proper
// complete rooted subtree has fewer than k leaves for the caller's k.
RoundingOutcome round1(const TapInstance& inst, const std::vector<Rat>& x);

// Second rounding.  General costs: replace every non-up in-link by its two
// up-shadows, solve the Cut-LP on the resulting spider-shaped instance (the
// extreme point is half-integral and integral on root links, asserted), keep
// the 1-links and cover the rest exactly within the half support; cost at
// most (4/3)*(2*C^in + C^cr + C^r), asserted.  Unit costs: eliminate cross
// cycles, shift in-link mass onto up-shadows, merge nested covers, then peel
// leaves with no positive cross link via their unique >= 1 up-link; size at
// most 2*C^in + (4/3)*C^cr + C^r, asserted.  Requires x in the Cut polytope.
std::vector<int> round2(const TapInstance& inst, const std::vector<Rat>& x,
                        CostMode mode);

// Cover the subtree S = subtree(s_hat) / S' (S' contracted into the root of
// the piece): contract everything outside into the root slot, run round1; a
// violated branch propagates (re-expressed in `inst` coordinates), otherwise
// the cheaper of round1/round2 is returned with the local-ratio bound
// rho * sum_{non-root links} c x + (4/3) * sum_{root links} c x asserted on
// the sub-instance.  `shat_nodes`/`sprime_nodes` are node masks in `inst`.
RoundingOutcome cover_subtree(const TapInstance& inst, const std::vector<Rat>& x,
                              EdgeSet shat_nodes, EdgeSet sprime_nodes,
                              const PipelineParams& params);

// One outer iteration sweep: repeatedly pick a minimal (k,lambda)-subtree,
// cover it (or report a violated branch inequality in `inst` coordinates),
// contract it, and finally cover the accumulated thick edges.  The trace
// records every pass.  Cost bound (rho + (8/3) lambda M/(k-lambda M) +
// 2/lambda) * c^T x asserted when k > lambda*M.
struct OuterResult {
    RoundingOutcome outcome;
    nlohmann::json trace;
};
OuterResult outer_iteration(const TapInstance& inst, const std::vector<Rat>& x,
                            const PipelineParams& params);

// Cutting-plane driver: solve the Cut-LP, run outer_iteration on the optimum,
// add the reported branch row and re-solve until a cover comes back.  The
// returned ratio cost/lp_value is certified <= pipeline_bound (asserted when
// k > lambda*M).
struct DriverResult {
    std::vector<int> links;
    long long cost = 0;
    Rat lp_value;
    Rat ratio;
    int rows_added = 0;
    nlohmann::json trace;
};
DriverResult lazy_kbranch_driver(const TapInstance& inst, const PipelineParams& params);

// Exact-ratio solver for trees of diameter <= 7: ratio 3/2 up to diameter 5,
// 9/5 up to diameter 7, both asserted against solve_exact.  Odd diameters
// guess a link covering the central edge and recurse on the contraction; even
// diameters take the better of per-branch solves around the center and a
// spider-restricted exact solve.
struct DiamResult {
    std::vector<int> links;
    long long cost = 0;
    long long exact = 0;
    Rat ratio;      // cost / exact (1 when the tree has no edges)
    Rat certified;  // 3/2 or 9/5
};
DiamResult solve_diameter_le7(const TapInstance& inst);

} // namespace tap
