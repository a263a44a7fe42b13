#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tap/error.hpp"
#include "tap/instance.hpp"
#include "tap/rational.hpp"

namespace tap {

// Process exit code for an Error: malformed input and infeasible instances
// exit 2, cap overruns 3, certificate trouble (including a failed semi-closed
// subtree search) 4, broken internal invariants 1.
int exit_code_for(ErrorKind kind);

// Knobs shared by the LP-based algorithms.
struct SolveParams {
    int k = 6;
    Rat lambda = Rat(2);
};

// One algorithm run.  LP algorithms fill `value` only; integral algorithms
// also fill `cost` plus the observed ratio against `baseline` and the bound
// `certified_ratio` that the run proves for it.
struct AlgoRun {
    std::string algo;
    bool ok = false;
    std::string error;            // set when !ok
    int exit_code = 0;            // exit_code_for() on failure, 4 on a failed certificate
    long long cost = -1;          // integral cover cost, -1 when not applicable
    Rat value;                    // LP optimum, or cost as a rational
    Rat observed_ratio;           // cost / baseline value (when both exist)
    Rat certified_ratio;          // proved upper bound for observed_ratio
    std::string baseline;         // denominator of observed_ratio
    bool has_certificate = false; // unitgap / unitgap-bunch only
    bool certificate_pass = false;
    nlohmann::json detail;
    nlohmann::json to_json() const;
};

// Per-instance summary: the exact optimum, the three LP bounds, the requested
// algorithm runs, and any violated sandwich inequality (cutLpOpt <=
// kBranchLpOpt <= exactOpt, cutLpOpt <= bunch3LpOpt <= exactOpt, every
// algorithm cost >= exactOpt).  Violations are never expected; they are
// recorded rather than thrown so a suite can keep going.
struct GapReport {
    long long instance_id = 0;
    int n = 0;
    int leaf_count = 0;
    int diameter = 0;
    long long max_cost = 1;
    long long exact_opt = 0;
    Rat cut_lp_opt;
    Rat kbranch_lp_opt;
    Rat bunch3_lp_opt;
    std::vector<AlgoRun> algos;
    std::vector<std::string> violations;
    nlohmann::json to_json() const;
};

// Algorithm names accepted by run_algo / tapsolve:
//   exact         built-in exact solver
//   cutlp         Cut-LP optimum (x listed when with_detail)
//   kbranch       lazy k-branch cutting-plane pipeline
//   bunch3        3-bunch LP optimum by lazy row generation
//   outer         one outer-iteration sweep on the Cut-LP optimum
//   unitgap       iterative contraction + 28/15 dual certificate (unit costs)
//   unitgap-bunch iterative contraction + 7/4 dual certificate (unit costs)
//   diam7         exact-ratio solver for diameter <= 7
//   uplink2       2-approximation by covering with up-link shadows
// Unknown names and malformed instances throw; algorithm failures throw too —
// callers that must keep going catch and record.  A failed dual certificate
// does not throw (the cover stays valid): it is reported with exit_code 4.
AlgoRun run_algo(const TapInstance& inst, const std::string& algo, const SolveParams& params,
                 bool with_detail);

// Runs every requested algorithm (failures recorded per run, never thrown)
// and checks the sandwich inequalities.
GapReport evaluate_instance(const TapInstance& inst, long long instance_id,
                            const std::vector<std::string>& algos, const SolveParams& params);

// Suite driver.  Config:
//   {"seed": 1, "k": 6, "lambda": "2",
//    "groups": [{"profile": "random-tree", "count": 20, "n": 10, "links": -1,
//                "diameter": 5, "maxCost": 1, "algos": ["exact", "unitgap"]}]}
// Missing "algos" defaults to exact/cutlp/kbranch/bunch3 plus the two unitgap
// modes on unit-cost groups.  Instance seeds derive deterministically from
// (seed, instanceId); reports are ordered by instanceId.  `pass` is false if
// any run failed or any sandwich inequality broke — certificate failures are
// tallied separately and do not flip it.
struct SuiteResult {
    nlohmann::json report; // {"reports": [...], "summary": {...}}
    bool pass = false;
};
SuiteResult run_suite(const nlohmann::json& config);

} // namespace tap
