#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tap/instance.hpp"
#include "tap/lp.hpp"
#include "tap/oracle.hpp"
#include "tap/rational.hpp"

namespace tap {

// Dual-fitting flavours: the Cut-LP certificate targets 28/15, the 3-bunch
// variant targets 7/4.
enum class DualMode { Cut2815, Bunch74 };

Rat dual_rho(DualMode mode);

enum class StepKind { TwinInit, Greedy, SemiClosed };

// One contraction, recorded against the tree as it was when the step ran.
struct TraceStep {
    StepKind kind = StepKind::Greedy;
    EdgeSet cur_nodes = 0;   // node set (current indices) contracted by the step
    std::vector<int> links;  // closed-instance link ids added to the cover
    int m_inside = 0;        // matched pairs inside the subtree (semi-closed)
    int u_inside = 0;        // unmatched leaves inside (semi-closed)
    int c_inside = 0;        // non-leaf compound nodes inside, root included
};

// Evolving state of the contraction loop.  The matching pairs original
// leaves; unmatched leaves of the current tree are recomputed on demand.
struct ContractionState {
    TapInstance tree;                       // current (contracted) tree
    std::vector<int> src_link;              // current link id -> closed link id
    std::vector<int> where;                 // original node -> current node
    std::vector<EdgeSet> blob;              // current node -> original node set
    std::vector<long long> used;            // current node -> links spent inside
    std::vector<char> compound;             // current node -> made by a contraction
    std::vector<std::pair<int, int>> pairs; // alive matching, current node indices
    std::vector<int> cover;                 // closed link ids chosen so far

    // The root always counts as a compound node.
    bool is_compound(int v) const { return compound[v] != 0 || v == tree.root(); }
    bool matched(int v) const;
    std::vector<int> unmatched_leaves() const;       // ascending current indices
    bool m_compatible(EdgeSet nodes) const;          // no pair split by the set
    bool unmatched_closed(EdgeSet nodes) const;      // no unmatched leaf link leaves the set
    // Original node whose parent edge is the current node's parent edge.
    int blob_top(const TapInstance& closed, int v) const;
    void contract_nodes(EdgeSet nodes, const std::vector<int>& links_closed);
};

// Full record of one iterative-contraction run on the shadow closure.
struct ContractionTrace {
    TapInstance closed;                        // shadow-closed working instance
    std::vector<int> parent_link;              // closed link id -> original link id
    std::vector<std::pair<int, int>> matching; // leaf matching, original node indices
    std::vector<std::pair<int, int>> twins;    // initial twin pairs contracted
    std::vector<int> stems;                    // stem per twin (original node index)
    std::vector<TraceStep> steps;              // contractions in order
    std::vector<int> cover_closed;             // final cover, closed link ids
};

struct UnitGapResult {
    std::vector<int> links;      // original link ids (deduplicated, ascending)
    long long cost = 0;          // == links.size()
    long long closed_count = 0;  // links the run actually spent on the closure
    ContractionTrace trace;
};

// State machine pieces (exposed for tests and the certificate replay).
ContractionState init_matching(const TapInstance& closed, ContractionTrace& trace);
void greedy_contract_all(ContractionState& st, ContractionTrace& trace);

struct SemiClosedChoice {
    int top = 0;             // current node whose complete subtree is contracted
    std::vector<int> links;  // closed link ids covering the subtree
    int m_inside = 0;
    int u_inside = 0;
    int c_inside = 0;
};
// Post-order scan for a contractible complete subtree; NoSubtreeFound when the
// scan exhausts without an eligible candidate.
SemiClosedChoice find_semiclosed(const ContractionState& st);
bool is_dangerous(const ContractionState& st, int top);

// Contract to a single node, alternating greedy rounds and subtree
// contractions.  The returned cover is verified against the original edges.
UnitGapResult iterative_contraction(const TapInstance& inst);

struct DualCertificate {
    DualMode mode = DualMode::Cut2815;
    std::vector<Rat> y_edge; // per tree edge, indexed by child node; root unused
    struct BunchVar {
        EdgeSet edges = 0;   // the three tree edges of the bunch
        Rat y;
    };
    std::vector<BunchVar> bunches; // empty in Cut mode
    bool pass = false;
};

// Replays the trace and grows a dual solution alongside it: fixed initial
// values, then one bounded local-search update per subtree contraction.
// Every step must keep the level-bounded loads and the node credits; if no
// update pattern does, throws Error(CertificateFailure) naming the clause.
DualCertificate build_dual(const ContractionTrace& trace, DualMode mode);

struct CertificateReport {
    bool property1 = false;     // cover size <= dual value
    bool loads = false;         // every closed link load <= rho
    bool credit = false;        // final contracted node keeps credit >= 1
    bool bunch_sanity = false;  // bunch variables sit on valid 3-bunches, y >= 0
    bool weak_duality = false;  // dual value <= rho * LP optimum
    bool implied_ratio = false; // cover size <= rho * LP optimum
    bool pass = false;
    Rat dual_value;
    Rat lp_opt;                 // Cut-LP or 3-bunch LP optimum of the closure
    Rat rho;
    nlohmann::json dump;        // {yEdge, yBunch, loads, credits, pass}
};

// Recomputes every load, the final credit and the payment inequality from
// scratch, and checks the implied gap bound against the matching LP.
CertificateReport check_certificate(const ContractionTrace& trace,
                                    const DualCertificate& cert);

} // namespace tap
