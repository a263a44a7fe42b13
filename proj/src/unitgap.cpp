#include "tap/unitgap.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tap/caps.hpp"
#include "tap/error.hpp"

namespace tap {

namespace {

EdgeSet bit(int v) { return EdgeSet{1} << v; }

int popcount(EdgeSet s) { return std::popcount(s); }

std::vector<int> set_to_vec(EdgeSet s) {
    std::vector<int> out;
    while (s) {
        out.push_back(std::countr_zero(s));
        s &= s - 1;
    }
    return out;
}

void sort_unique(std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Contracting the path between u and v yields a childless node exactly when
// every child of a path node lies on the path; the new node is then a leaf
// unless it absorbed the root.
bool contraction_makes_leaf(const TapInstance& t, int u, int v) {
    EdgeSet path = t.path_nodes(u, v);
    if ((path >> t.root()) & 1) return false;
    for (int p : set_to_vec(path))
        for (int c : t.children(p))
            if (!((path >> c) & 1)) return false;
    return true;
}

ContractionState fresh_state(const TapInstance& closed,
                             const std::vector<std::pair<int, int>>& matching) {
    ContractionState st;
    st.tree = closed;
    st.src_link.resize(closed.num_links());
    std::iota(st.src_link.begin(), st.src_link.end(), 0);
    st.where.resize(closed.n());
    std::iota(st.where.begin(), st.where.end(), 0);
    st.blob.resize(closed.n());
    for (int v = 0; v < closed.n(); ++v) st.blob[v] = bit(v);
    st.used.assign(closed.n(), 0);
    st.compound.assign(closed.n(), 0);
    st.pairs = matching;
    return st;
}

} // namespace

Rat dual_rho(DualMode mode) { return mode == DualMode::Cut2815 ? Rat(28, 15) : Rat(7, 4); }

bool ContractionState::matched(int v) const {
    for (const auto& [a, b] : pairs)
        if (a == v || b == v) return true;
    return false;
}

std::vector<int> ContractionState::unmatched_leaves() const {
    std::vector<int> out;
    for (int v = 0; v < tree.n(); ++v)
        if (tree.is_leaf(v) && !matched(v)) out.push_back(v);
    return out;
}

bool ContractionState::m_compatible(EdgeSet nodes) const {
    for (const auto& [a, b] : pairs)
        if (((nodes >> a) & 1) != ((nodes >> b) & 1)) return false;
    return true;
}

bool ContractionState::unmatched_closed(EdgeSet nodes) const {
    for (int v = 0; v < tree.n(); ++v) {
        if (!((nodes >> v) & 1) || !tree.is_leaf(v) || matched(v)) continue;
        for (int e = 0; e < tree.num_links(); ++e) {
            const Link& l = tree.link(e);
            int other = l.u == v ? l.v : (l.v == v ? l.u : -1);
            if (other >= 0 && !((nodes >> other) & 1)) return false;
        }
    }
    return true;
}

int ContractionState::blob_top(const TapInstance& closed, int v) const {
    int best = -1;
    for (int w : set_to_vec(blob[v]))
        if (best < 0 || closed.depth(w) < closed.depth(best)) best = w;
    return best;
}

void ContractionState::contract_nodes(EdgeSet nodes, const std::vector<int>& links_closed) {
    check(popcount(nodes) >= 2, "contracting fewer than two nodes");
    check(m_compatible(nodes), "contraction splits a matched pair");
    ContractionResult ctr = contract(tree, nodes);
    EdgeSet merged = 0;
    long long spent = static_cast<long long>(links_closed.size());
    for (int v = 0; v < tree.n(); ++v) {
        if (!((nodes >> v) & 1)) continue;
        merged |= blob[v];
        spent += used[v];
    }
    int target = ctr.node_map[std::countr_zero(nodes)];
    std::vector<EdgeSet> nblob(ctr.inst.n());
    std::vector<long long> nused(ctr.inst.n());
    std::vector<char> ncomp(ctr.inst.n());
    for (int j = 0; j < ctr.inst.n(); ++j) {
        if (j == target) {
            nblob[j] = merged;
            nused[j] = spent;
            ncomp[j] = 1;
        } else {
            int old = ctr.src_node[j];
            nblob[j] = blob[old];
            nused[j] = used[old];
            ncomp[j] = compound[old];
        }
    }
    std::vector<int> nsrc(ctr.inst.num_links());
    for (int e = 0; e < ctr.inst.num_links(); ++e) nsrc[e] = src_link[ctr.src_link[e]];
    for (auto& [a, b] : pairs) {
        a = ctr.node_map[a];
        b = ctr.node_map[b];
    }
    std::erase_if(pairs, [](const std::pair<int, int>& p) { return p.first == p.second; });
    for (int& w : where) w = ctr.node_map[w];
    tree = std::move(ctr.inst);
    src_link = std::move(nsrc);
    blob = std::move(nblob);
    used = std::move(nused);
    compound = std::move(ncomp);
    cover.insert(cover.end(), links_closed.begin(), links_closed.end());
}

ContractionState init_matching(const TapInstance& closed, ContractionTrace& trace) {
    check(closed.unit_costs(), "iterative contraction requires unit costs",
          ErrorKind::Malformed);
    closed.require_feasible();
    ContractionState st = fresh_state(closed, {});
    std::vector<char> taken(closed.n(), 0);
    // Leaf matching over the non-twin links first, greedily by link id.
    for (int e = 0; e < closed.num_links(); ++e) {
        const Link& l = closed.link(e);
        if (l.u == l.v || !closed.is_leaf(l.u) || !closed.is_leaf(l.v)) continue;
        if (taken[l.u] || taken[l.v]) continue;
        if (contraction_makes_leaf(closed, l.u, l.v)) continue;
        taken[l.u] = taken[l.v] = 1;
        trace.matching.emplace_back(std::min(l.u, l.v), std::max(l.u, l.v));
        st.pairs.emplace_back(std::min(l.u, l.v), std::max(l.u, l.v));
    }
    // The leftover leaf-to-leaf links must all be twins; match and contract them.
    std::vector<int> twin_links;
    for (int e = 0; e < closed.num_links(); ++e) {
        const Link& l = closed.link(e);
        if (l.u == l.v || !closed.is_leaf(l.u) || !closed.is_leaf(l.v)) continue;
        if (taken[l.u] || taken[l.v]) continue;
        check(contraction_makes_leaf(closed, l.u, l.v),
              "non-twin leaf link escaped the first matching");
        taken[l.u] = taken[l.v] = 1;
        trace.twins.emplace_back(std::min(l.u, l.v), std::max(l.u, l.v));
        trace.stems.push_back(closed.lca(l.u, l.v));
        twin_links.push_back(e);
    }
    for (int e : twin_links) {
        const Link& l = closed.link(e);
        TraceStep step;
        step.kind = StepKind::TwinInit;
        step.cur_nodes = st.tree.path_nodes(st.where[l.u], st.where[l.v]);
        step.links = {e};
        st.contract_nodes(step.cur_nodes, step.links);
        trace.steps.push_back(std::move(step));
    }
    return st;
}

void greedy_contract_all(ContractionState& st, ContractionTrace& trace) {
    for (;;) {
        std::vector<char> free_leaf(st.tree.n(), 0);
        for (int v : st.unmatched_leaves()) free_leaf[v] = 1;
        int best = -1;
        for (int e = 0; e < st.tree.num_links(); ++e) {
            const Link& l = st.tree.link(e);
            if (l.u == l.v || !free_leaf[l.u] || !free_leaf[l.v]) continue;
            if (best < 0 || st.src_link[e] < st.src_link[best]) best = e;
        }
        if (best < 0) return;
        TraceStep step;
        step.kind = StepKind::Greedy;
        step.cur_nodes = st.tree.path_nodes(st.tree.link(best).u, st.tree.link(best).v);
        step.links = {st.src_link[best]};
        st.contract_nodes(step.cur_nodes, step.links);
        trace.steps.push_back(std::move(step));
    }
}

bool is_dangerous(const ContractionState& st, int top) {
    const TapInstance& t = st.tree;
    EdgeSet S = t.subtree_nodes(top);
    std::vector<std::pair<int, int>> inside;
    for (const auto& [a, b] : st.pairs) {
        bool ia = (S >> a) & 1, ib = (S >> b) & 1;
        if (ia != ib) return false; // split pair: caller rejects the subtree anyway
        if (ia) inside.emplace_back(a, b);
    }
    if (inside.size() != 1) return false;
    std::vector<int> uin;
    for (int v : st.unmatched_leaves())
        if ((S >> v) & 1) uin.push_back(v);
    if (uin.size() != 1) return false;
    for (int v = 0; v < t.n(); ++v)
        if (((S >> v) & 1) && !t.is_leaf(v) && st.is_compound(v)) return false;
    int a = uin[0];
    auto open_at = [&](int x) {
        for (int e = 0; e < t.num_links(); ++e) {
            const Link& l = t.link(e);
            int other = l.u == x ? l.v : (l.v == x ? l.u : -1);
            if (other >= 0 && !((S >> other) & 1)) return true;
        }
        return false;
    };
    if (open_at(a)) return false; // the subtree must be closed at the unmatched leaf
    auto [b, bp] = inside[0];
    for (auto [keep, other] : {std::pair{b, bp}, std::pair{bp, b}}) {
        if (find_link(t, a, other) < 0) continue;
        if (contraction_makes_leaf(t, a, other)) continue;
        if (open_at(keep)) return true;
    }
    return false;
}

SemiClosedChoice find_semiclosed(const ContractionState& st) {
    const TapInstance& t = st.tree;
    for (int v : t.post_order()) {
        EdgeSet S = t.subtree_nodes(v);
        if (popcount(S) < 2) continue;
        if (!st.m_compatible(S)) continue;
        if (!st.unmatched_closed(S)) continue;
        if (is_dangerous(st, v)) continue;
        int m_in = 0;
        for (const auto& [a, b] : st.pairs)
            if ((S >> a) & 1) ++m_in;
        int u_in = 0;
        for (int u : st.unmatched_leaves())
            if ((S >> u) & 1) ++u_in;
        int c_in = 0;
        for (int w = 0; w < t.n(); ++w)
            if (((S >> w) & 1) && !t.is_leaf(w) && st.is_compound(w)) ++c_in;
        EdgeSet target = S & ~bit(v);
        std::vector<int> allowed;
        for (int e = 0; e < t.num_links(); ++e) {
            const Link& l = t.link(e);
            if (l.u != l.v && ((S >> l.u) & 1) && ((S >> l.v) & 1)) allowed.push_back(e);
        }
        ExactResult res;
        try {
            res = solve_exact_subset(t, target, caps().max_classes, &allowed);
        } catch (const Error& err) {
            if (err.kind() == ErrorKind::Infeasible) continue;
            throw;
        }
        if (static_cast<int>(res.links.size()) > m_in + u_in) continue;
        SemiClosedChoice out;
        out.top = v;
        out.m_inside = m_in;
        out.u_inside = u_in;
        out.c_inside = c_in;
        for (int e : res.links) out.links.push_back(st.src_link[e]);
        std::sort(out.links.begin(), out.links.end());
        return out;
    }
    fail(ErrorKind::NoSubtreeFound, "no contractible semi-closed subtree");
}

UnitGapResult iterative_contraction(const TapInstance& inst) {
    check(inst.unit_costs(), "iterative contraction requires unit costs",
          ErrorKind::Malformed);
    inst.require_feasible();
    ShadowClosure sc = shadow_close_unit(inst);
    UnitGapResult out;
    out.trace.closed = sc.inst;
    out.trace.parent_link = sc.parent_link;
    ContractionState st = init_matching(out.trace.closed, out.trace);
    while (st.tree.n() > 1) {
        greedy_contract_all(st, out.trace);
        if (st.tree.n() <= 1) break;
        SemiClosedChoice ch = find_semiclosed(st);
        TraceStep step;
        step.kind = StepKind::SemiClosed;
        step.cur_nodes = st.tree.subtree_nodes(ch.top);
        step.links = ch.links;
        step.m_inside = ch.m_inside;
        step.u_inside = ch.u_inside;
        step.c_inside = ch.c_inside;
        st.contract_nodes(step.cur_nodes, step.links);
        out.trace.steps.push_back(std::move(step));
    }
    out.trace.cover_closed = st.cover;
    check(covers(out.trace.closed, st.cover, out.trace.closed.all_edges()),
          "contraction cover misses a tree edge");
    out.closed_count = static_cast<long long>(st.cover.size());
    for (int e : st.cover) out.links.push_back(out.trace.parent_link[e]);
    sort_unique(out.links);
    check(covers(inst, out.links, inst.all_edges()), "mapped cover misses a tree edge");
    out.cost = static_cast<long long>(out.links.size());
    return out;
}

// ---- dual construction ------------------------------------------------------

namespace {

struct DualCtx {
    const TapInstance& closed;
    DualMode mode;
    std::vector<Rat> y; // per tree edge, indexed by child node
    std::vector<DualCertificate::BunchVar> bunches;
};

Rat level_bound(DualMode mode, int level) {
    if (level <= 0) return Rat(0);
    if (mode == DualMode::Cut2815) return level == 1 ? Rat(16, 15) : Rat(28, 15);
    return level == 1 ? Rat(1) : Rat(7, 4);
}

// Link level: endpoints mapped into the current tree; compound nodes (the root
// included) and still-original leaves count, a link inside one blob counts 2.
int link_level(const DualCtx& cx, const ContractionState& st, int e) {
    int cu = st.where[cx.closed.link(e).u];
    int cv = st.where[cx.closed.link(e).v];
    if (cu == cv) return 2;
    auto counts = [&](int x) { return st.is_compound(x) || st.tree.is_leaf(x); };
    return (counts(cu) ? 1 : 0) + (counts(cv) ? 1 : 0);
}

// Load of a link: duals along its tree path, plus every bunch it covers a part of.
Rat load_of(const DualCtx& cx, int e) {
    EdgeSet path = cx.closed.cover_set(e);
    Rat s;
    for (int f : set_to_vec(path)) s += cx.y[f];
    for (const auto& b : cx.bunches)
        if ((b.edges & path) != 0) s += b.y;
    return s;
}

// Credit of a current node: duals of the parent edges of its original nodes
// (the node's own parent edge included), bunches lying fully inside those
// edges at their weight, minus the links spent, plus one if it holds the root.
Rat credit_of(const DualCtx& cx, const ContractionState& st, int v) {
    EdgeSet pes = st.blob[v] & ~bit(cx.closed.root());
    Rat s;
    for (int w : set_to_vec(pes)) s += cx.y[w];
    for (const auto& b : cx.bunches)
        if ((b.edges & ~pes) == 0) s += Rat(2) * b.y;
    s -= Rat(st.used[v]);
    if ((st.blob[v] >> cx.closed.root()) & 1) s += Rat(1);
    return s;
}

// The running invariant: nonnegative duals, loads within the level bounds, and
// credit at least one on every compound node and unmatched leaf.
std::optional<std::string> invariant_violation(const DualCtx& cx, const ContractionState& st) {
    for (const Rat& yv : cx.y)
        if (yv.sign() < 0) return "negative edge dual";
    for (const auto& b : cx.bunches)
        if (b.y.sign() < 0) return "negative bunch dual";
    for (int e = 0; e < cx.closed.num_links(); ++e)
        if (load_of(cx, e) > level_bound(cx.mode, link_level(cx, st, e)))
            return "load bound broken on link " + std::to_string(e);
    for (int v = 0; v < st.tree.n(); ++v) {
        bool needs = st.is_compound(v) || (st.tree.is_leaf(v) && !st.matched(v));
        if (needs && credit_of(cx, st, v) < Rat(1))
            return "credit below one at a node holding " +
                   std::to_string(popcount(st.blob[v])) + " original nodes";
    }
    return std::nullopt;
}

struct Pattern {
    std::vector<std::pair<int, int>> signs; // (tree edge by child node, +1/-1)
    std::optional<DualCertificate::BunchVar> bunch;
};

bool try_pattern(DualCtx& cx, const ContractionState& st, const Pattern& p, const Rat& delta) {
    for (auto [f, s] : p.signs) cx.y[f] += delta * Rat(s);
    if (p.bunch) cx.bunches.push_back(*p.bunch);
    if (!invariant_violation(cx, st)) return true;
    for (auto [f, s] : p.signs) cx.y[f] -= delta * Rat(s);
    if (p.bunch) cx.bunches.pop_back();
    return false;
}

// Size-k index subsets of 0..m-1 in lexicographic order; fn returns true to stop.
template <typename F>
bool for_each_subset(int m, int k, F&& fn) {
    if (k > m || k < 0) return false;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
        if (fn(idx)) return true;
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) return false;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Sign patterns over the candidate edges with (#plus - #minus) == net, tried by
// growing support size, each at step `delta`.  First feasible pattern sticks.
bool search_signed(DualCtx& cx, const ContractionState& st, const std::vector<int>& cand,
                   int net, const Rat& delta, int max_support = 5) {
    int m = static_cast<int>(cand.size());
    if (m > 12) return false; // keep the pattern space small; larger subtrees
                              // only reach here on an already-failing no-update path
    for (int t = std::max(1, net); t <= std::min(m, max_support); ++t) {
        if ((t - net) % 2 != 0) continue;
        int p = (t + net) / 2;
        bool found = for_each_subset(m, t, [&](const std::vector<int>& sup) {
            return for_each_subset(t, p, [&](const std::vector<int>& plus) {
                std::vector<char> isp(t, 0);
                for (int i : plus) isp[i] = 1;
                Pattern pat;
                for (int i = 0; i < t; ++i)
                    pat.signs.emplace_back(cand[sup[i]], isp[i] ? 1 : -1);
                return try_pattern(cx, st, pat, delta);
            });
        });
        if (found) return true;
    }
    return false;
}

// All-plus patterns of exactly k candidate edges (the shape of the update used
// when the subtree holds no matched pair).
bool search_all_plus(DualCtx& cx, const ContractionState& st, const std::vector<int>& cand,
                     int k, const Rat& delta) {
    int m = static_cast<int>(cand.size());
    if (m > 12) return false;
    return for_each_subset(m, k, [&](const std::vector<int>& sup) {
        Pattern pat;
        for (int i : sup) pat.signs.emplace_back(cand[i], 1);
        return try_pattern(cx, st, pat, delta);
    });
}

// Bunch-mode exception: drop one leaf dual by 1/2 and open a 3-bunch at 1/2
// instead, so the total still grows by the mandated 1/2.
bool search_bunch_swap(DualCtx& cx, const ContractionState& st, const std::vector<int>& leaf_pes,
                       const std::vector<int>& cand) {
    int m = static_cast<int>(cand.size());
    if (m > 12) return false;
    for (int x : leaf_pes) {
        bool found = for_each_subset(m, 3, [&](const std::vector<int>& sup) {
            EdgeSet b = bit(cand[sup[0]]) | bit(cand[sup[1]]) | bit(cand[sup[2]]);
            if (!bunch3_valid(cx.closed, b)) return false;
            Pattern pat;
            pat.signs.emplace_back(x, -1);
            pat.bunch = DualCertificate::BunchVar{b, Rat(1, 2)};
            return try_pattern(cx, st, pat, Rat(1, 2));
        });
        if (found) return true;
    }
    return false;
}

} // namespace

DualCertificate build_dual(const ContractionTrace& trace, DualMode mode) {
    const TapInstance& closed = trace.closed;
    DualCertificate cert;
    cert.mode = mode;
    DualCtx cx{closed, mode, std::vector<Rat>(closed.n()), {}};
    ContractionState st = fresh_state(closed, trace.matching);

    // Initial values: unmatched leaves pay 1, matched leaves 4/5 (3/4), twin
    // leaves 14/15 (1/2); each twin stem adds 2/15 on its parent edge in Cut
    // mode and a 3-bunch of its incident edges at 1/2 in bunch mode.
    std::vector<char> in_m(closed.n(), 0), in_j(closed.n(), 0);
    for (const auto& [a, b] : trace.matching) in_m[a] = in_m[b] = 1;
    for (const auto& [a, b] : trace.twins) in_j[a] = in_j[b] = 1;
    for (int v = 0; v < closed.n(); ++v) {
        if (!closed.is_leaf(v)) continue;
        if (in_m[v])
            cx.y[v] = mode == DualMode::Cut2815 ? Rat(4, 5) : Rat(3, 4);
        else if (in_j[v])
            cx.y[v] = mode == DualMode::Cut2815 ? Rat(14, 15) : Rat(1, 2);
        else
            cx.y[v] = Rat(1);
    }
    for (int s : trace.stems) {
        if (s == closed.root()) continue; // no parent edge to charge
        if (mode == DualMode::Cut2815) {
            cx.y[s] += Rat(2, 15);
        } else {
            EdgeSet b = bit(s);
            for (int c : closed.children(s)) b |= bit(c);
            check(popcount(b) == 3, "twin stem without exactly two children");
            check(bunch3_valid(closed, b), "stem bunch is not a valid 3-bunch");
            cx.bunches.push_back({b, Rat(1, 2)});
        }
    }

    std::size_t i = 0;
    for (; i < trace.steps.size() && trace.steps[i].kind == StepKind::TwinInit; ++i)
        st.contract_nodes(trace.steps[i].cur_nodes, trace.steps[i].links);
    if (auto bad = invariant_violation(cx, st))
        fail(ErrorKind::CertificateFailure, "initial duals: " + *bad);

    for (; i < trace.steps.size(); ++i) {
        const TraceStep& stp = trace.steps[i];
        if (stp.kind == StepKind::Greedy) {
            st.contract_nodes(stp.cur_nodes, stp.links);
            if (auto bad = invariant_violation(cx, st))
                fail(ErrorKind::CertificateFailure, "greedy step: " + *bad);
            continue;
        }
        // Semi-closed contraction: shape data comes from the pre-contraction
        // tree, the update pattern is validated against the post-contraction one.
        EdgeSet S = stp.cur_nodes;
        int m_in = 0;
        for (const auto& [a, b] : st.pairs)
            if ((S >> a) & 1) ++m_in;
        std::vector<int> upes; // parent edges of the unmatched leaves inside
        for (int u : st.unmatched_leaves())
            if ((S >> u) & 1) upes.push_back(st.blob_top(closed, u));
        int c_in = 0;
        for (int v = 0; v < st.tree.n(); ++v)
            if (((S >> v) & 1) && !st.tree.is_leaf(v) && st.is_compound(v)) ++c_in;
        int top = -1;
        std::vector<int> cand, leaf_pes;
        for (int v : set_to_vec(S)) {
            if (top < 0 || st.tree.depth(v) < st.tree.depth(top)) top = v;
            if (st.tree.is_leaf(v)) leaf_pes.push_back(st.blob_top(closed, v));
        }
        for (int v : set_to_vec(S)) {
            if (v == st.tree.root()) continue;
            cand.push_back(st.blob_top(closed, v));
        }
        std::sort(cand.begin(), cand.end());
        std::sort(leaf_pes.begin(), leaf_pes.end());
        int top_pe = top == st.tree.root() ? -1 : st.blob_top(closed, top);

        st.contract_nodes(S, stp.links);

        bool ok = false;
        if (c_in >= 1 || m_in >= 2) {
            // No update mandated; the new node's credit rides on the compound
            // credits (or the root bonus) it absorbed.
            ok = try_pattern(cx, st, Pattern{}, Rat(1, 2));
            if (!ok) ok = search_signed(cx, st, cand, 1,
                                        mode == DualMode::Cut2815 ? Rat(2, 5) : Rat(1, 2));
        } else if (m_in == 0) {
            // Raise the parent edges of the unmatched leaves and of the subtree
            // top by 1/2 each.
            Pattern pat;
            for (int f : upes) pat.signs.emplace_back(f, 1);
            if (top_pe >= 0) pat.signs.emplace_back(top_pe, 1);
            ok = try_pattern(cx, st, pat, Rat(1, 2));
            if (!ok)
                ok = search_all_plus(cx, st, cand,
                                     static_cast<int>(upes.size()) + (top_pe >= 0 ? 1 : 0),
                                     Rat(1, 2));
        } else {
            // One matched pair inside: balanced +/- pattern with one extra plus,
            // at 2/5 (Cut) or 1/2 (bunch); the bunch mode may instead trade a
            // leaf dual for a fresh 3-bunch.
            Rat delta = mode == DualMode::Cut2815 ? Rat(2, 5) : Rat(1, 2);
            ok = search_signed(cx, st, cand, 1, delta);
            if (!ok && mode == DualMode::Bunch74) ok = search_bunch_swap(cx, st, leaf_pes, cand);
        }
        if (!ok)
            fail(ErrorKind::CertificateFailure,
                 "no dual update keeps the bounds after contracting a subtree with " +
                     std::to_string(m_in) + " matched pairs, " + std::to_string(upes.size()) +
                     " unmatched leaves, " + std::to_string(c_in) + " compound nodes");
    }

    check(st.tree.n() == 1, "certificate replay did not reach a single node");
    Rat value;
    for (int v = 0; v < closed.n(); ++v)
        if (v != closed.root()) value += cx.y[v];
    for (const auto& b : cx.bunches) value += Rat(2) * b.y;
    if (Rat(static_cast<long long>(trace.cover_closed.size())) > value)
        fail(ErrorKind::CertificateFailure, "dual value ended below the cover size");
    cert.y_edge = std::move(cx.y);
    cert.bunches = std::move(cx.bunches);
    cert.pass = true;
    return cert;
}

CertificateReport check_certificate(const ContractionTrace& trace, const DualCertificate& cert) {
    const TapInstance& closed = trace.closed;
    CertificateReport rep;
    rep.rho = dual_rho(cert.mode);
    check(static_cast<int>(cert.y_edge.size()) == closed.n(),
          "certificate edge duals do not match the instance");

    Rat value;
    for (int v = 0; v < closed.n(); ++v)
        if (v != closed.root()) value += cert.y_edge[v];
    for (const auto& b : cert.bunches) value += Rat(2) * b.y;
    rep.dual_value = value;
    long long cover_size = static_cast<long long>(trace.cover_closed.size());
    rep.property1 = Rat(cover_size) <= value;

    rep.bunch_sanity = cert.mode == DualMode::Bunch74 || cert.bunches.empty();
    for (int v = 0; v < closed.n(); ++v)
        if (v != closed.root() && cert.y_edge[v].sign() < 0) rep.bunch_sanity = false;
    for (const auto& b : cert.bunches)
        if (b.y.sign() < 0 || !bunch3_valid(closed, b.edges)) rep.bunch_sanity = false;

    // Fully contracted, every link sits inside the final node: load <= rho.
    rep.loads = true;
    nlohmann::json loads_json = nlohmann::json::object();
    for (int e = 0; e < closed.num_links(); ++e) {
        EdgeSet path = closed.cover_set(e);
        Rat s;
        for (int f : set_to_vec(path)) s += cert.y_edge[f];
        for (const auto& b : cert.bunches)
            if ((b.edges & path) != 0) s += b.y;
        loads_json[std::to_string(e)] = s.str();
        if (s > rep.rho) rep.loads = false;
    }

    // Final payment: the single surviving node spent the whole cover.
    Rat final_credit = value - Rat(cover_size) + Rat(1);
    rep.credit = final_credit >= Rat(1);

    if (closed.n() > 1) {
        if (cert.mode == DualMode::Cut2815)
            rep.lp_opt = solve_lp(build_cut_lp(closed)).objective;
        else
            rep.lp_opt = solve_bunch3_lazy(closed).sol.objective;
    }
    rep.weak_duality = rep.dual_value <= rep.rho * rep.lp_opt;
    rep.implied_ratio = Rat(cover_size) <= rep.rho * rep.lp_opt;
    rep.pass = rep.property1 && rep.loads && rep.credit && rep.bunch_sanity &&
               rep.weak_duality && rep.implied_ratio;

    nlohmann::json y_json = nlohmann::json::object();
    for (int v = 0; v < closed.n(); ++v)
        if (v != closed.root()) y_json[std::to_string(closed.id_of(v))] = cert.y_edge[v].str();
    nlohmann::json bunch_json = nlohmann::json::array();
    for (const auto& b : cert.bunches) {
        nlohmann::json edges = nlohmann::json::array();
        for (int f : set_to_vec(b.edges)) edges.push_back(closed.id_of(f));
        bunch_json.push_back({{"edges", edges}, {"y", b.y.str()}});
    }
    rep.dump = {{"yEdge", y_json},
                {"yBunch", bunch_json},
                {"loads", loads_json},
                {"credits", {{"final", final_credit.str()}}},
                {"pass", rep.pass}};
    return rep;
}

} // namespace tap
