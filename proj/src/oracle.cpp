#include "tap/oracle.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <unordered_map>

namespace tap {

bool covers(const TapInstance& inst, const std::vector<int>& links, EdgeSet target) {
    EdgeSet got = 0;
    for (int e : links) got |= inst.cover_set(e);
    return (got & target) == target;
}

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

// Edge constraints collapsed by covering-link signature.
struct Collapsed {
    int classes = 0;
    std::vector<EdgeSet> link_cover;        // per link: which classes it covers
    std::vector<std::vector<int>> by_class; // per class: covering links, ascending
};

Collapsed collapse(const TapInstance& inst, EdgeSet target, int max_classes,
                   const std::vector<int>* allowed) {
    std::vector<char> allow;
    if (allowed) {
        allow.assign(inst.num_links(), 0);
        for (int e : *allowed) allow[e] = 1;
    }
    Collapsed c;
    std::map<std::vector<int>, int> sig_to_class;
    std::vector<int> edge_class(inst.n(), -1);
    for (int f = 0; f < inst.n(); ++f) {
        if (!(target & (EdgeSet{1} << f))) continue;
        std::vector<int> sig = inst.covering_links(EdgeSet{1} << f);
        if (allowed)
            std::erase_if(sig, [&](int e) { return !allow[e]; });
        if (sig.empty()) fail(ErrorKind::Infeasible, "edge below node " +
                                                         std::to_string(inst.id_of(f)) +
                                                         " is covered by no link");
        auto [it, fresh] = sig_to_class.emplace(std::move(sig), c.classes);
        if (fresh) {
            check(++c.classes <= max_classes, "exact solve exceeds the constraint-class cap",
                  ErrorKind::CapExceeded);
            c.by_class.push_back(it->first);
        }
        edge_class[f] = it->second;
    }
    c.link_cover.assign(inst.num_links(), 0);
    for (int cls = 0; cls < c.classes; ++cls)
        for (int e : c.by_class[cls]) c.link_cover[e] |= EdgeSet{1} << cls;
    return c;
}

struct Solver {
    const TapInstance& inst;
    const Collapsed& col;
    std::unordered_map<EdgeSet, long long> memo;

    long long best(EdgeSet uncovered) {
        if (uncovered == 0) return 0;
        auto it = memo.find(uncovered);
        if (it != memo.end()) return it->second;
        int cls = std::countr_zero(uncovered);
        long long m = kInf;
        for (int e : col.by_class[cls]) {
            long long sub = best(uncovered & ~col.link_cover[e]);
            if (sub < kInf) m = std::min(m, sub + inst.link(e).cost);
        }
        memo.emplace(uncovered, m);
        return m;
    }
};

} // namespace

ExactResult solve_exact_subset(const TapInstance& inst, EdgeSet target, int max_classes,
                               const std::vector<int>* allowed) {
    ExactResult r;
    target &= inst.all_edges();
    if (target == 0) return r;
    Collapsed col = collapse(inst, target, max_classes, allowed);
    Solver s{inst, col, {}};
    EdgeSet all = (col.classes == 64) ? ~EdgeSet{0} : ((EdgeSet{1} << col.classes) - 1);
    r.cost = s.best(all);
    check(r.cost < kInf, "unreachable: per-edge feasibility already checked");

    // Lexicographically first optimal link set: extend by the smallest id that
    // still covers something and keeps the remainder optimal.
    EdgeSet uncovered = all;
    long long remaining = r.cost;
    while (uncovered != 0) {
        bool took = false;
        for (int e = 0; e < inst.num_links(); ++e) {
            EdgeSet gain = col.link_cover[e] & uncovered;
            if (gain == 0) continue;
            long long sub = s.best(uncovered & ~col.link_cover[e]);
            if (sub < kInf && sub + inst.link(e).cost == remaining) {
                r.links.push_back(e);
                uncovered &= ~col.link_cover[e];
                remaining = sub;
                took = true;
                break;
            }
        }
        check(took, "unreachable: optimal extension always exists");
    }
    return r;
}

ExactResult solve_exact(const TapInstance& inst, int max_classes) {
    return solve_exact_subset(inst, inst.all_edges(), max_classes);
}

ShortcutResult shortcut_degree2(const TapInstance& inst) {
    // Removing a one-child node leaves every other node's child count intact
    // (the parent trades one child for another), so a single sweep suffices.
    std::vector<char> removed(inst.n(), 0);
    for (int v = 0; v < inst.n(); ++v)
        if (v != inst.root() && inst.children(v).size() == 1) removed[v] = 1;

    ShortcutResult out;
    std::vector<int> new_index(inst.n(), -1);
    for (int v = 0; v < inst.n(); ++v) {
        if (removed[v]) continue;
        new_index[v] = static_cast<int>(out.src_node.size());
        out.src_node.push_back(v);
    }
    std::vector<long long> ids;
    std::vector<int> parent;
    for (int v : out.src_node) {
        ids.push_back(inst.id_of(v));
        if (v == inst.root()) {
            parent.push_back(-1);
        } else {
            int a = inst.parent(v);
            while (removed[a]) a = inst.parent(a);
            parent.push_back(new_index[a]);
        }
    }
    std::vector<Link> links;
    for (int e = 0; e < inst.num_links(); ++e) {
        const Link& lk = inst.link(e);
        if (removed[lk.u] || removed[lk.v]) continue;
        links.push_back(Link{new_index[lk.u], new_index[lk.v], lk.cost});
        out.src_link.push_back(e);
    }
    out.inst = TapInstance::build(std::move(ids), new_index[inst.root()], std::move(parent),
                                  std::move(links));
    check(out.inst.num_edges() <= 2 * std::max(out.inst.leaf_count(), 1) - 1,
          "shortcut tree exceeds the 2*leaves - 1 edge bound");
    return out;
}

ExactResult solve_branch(const TapInstance& inst, const Branch& b, int max_classes) {
    // Work on the branch alone: contract everything outside it (for the
    // whole-tree branch there is nothing to contract).
    const TapInstance* sub = &inst;
    ContractionResult ctr;
    bool contracted = false;
    if (!b.whole_tree) {
        EdgeSet outside = ~inst.subtree_nodes(b.top) & ((EdgeSet{1} << inst.n()) - 1);
        ctr = contract(inst, outside);
        sub = &ctr.inst;
        contracted = true;
    }

    ShadowCompletion metric = shadow_complete(*sub);
    ShortcutResult sc = shortcut_degree2(metric.inst);
    ExactResult inner = solve_exact(sc.inst, max_classes);

    // Expand: shortcut link -> metric link -> covering sub links -> original.
    std::vector<int> picked;
    for (int e : inner.links)
        for (int s : metric.expansion[sc.src_link[e]])
            picked.push_back(contracted ? ctr.src_link[s] : s);
    std::sort(picked.begin(), picked.end());
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());

    ExactResult r;
    r.links = std::move(picked);
    for (int e : r.links) r.cost += inst.link(e).cost;
    check(covers(inst, r.links, b.edges), "expanded branch solution misses a branch edge");
    check(r.cost <= inner.cost, "expansion may only merge links, never add cost");
    check(r.cost >= inner.cost, "branch pipeline lost optimality during expansion");
    return r;
}

namespace {

// g[v][d] = cheapest choice of up links with lower endpoints inside the
// subtree of v that covers every target edge strictly below v and, when
// d < depth(v), also the vertical path from v up to depth d.
struct UplinkDp {
    const TapInstance& inst;
    EdgeSet target;
    std::vector<std::vector<long long>> g;
    std::vector<std::vector<int>> pick_link;  // -1 when delegated
    std::vector<std::vector<int>> pick_child; // delegate target, -1 otherwise
    std::vector<std::vector<long long>> best_link_cost; // per node, per depth
    std::vector<std::vector<int>> best_link_id;

    explicit UplinkDp(const TapInstance& t, EdgeSet tgt) : inst(t), target(tgt) {
        int n = inst.n();
        g.resize(n);
        pick_link.resize(n);
        pick_child.resize(n);
        best_link_cost.assign(n, {});
        best_link_id.assign(n, {});
        for (int v = 0; v < n; ++v) {
            best_link_cost[v].assign(inst.depth(v) + 1, kInf);
            best_link_id[v].assign(inst.depth(v) + 1, -1);
        }
        for (int e = 0; e < inst.num_links(); ++e) {
            if (!inst.classify_link(e).up) continue;
            const Link& lk = inst.link(e);
            int lo = inst.depth(lk.u) > inst.depth(lk.v) ? lk.u : lk.v;
            int hi = (lo == lk.u) ? lk.v : lk.u;
            long long c = lk.cost;
            int dt = inst.depth(hi);
            if (c < best_link_cost[lo][dt] ||
                (c == best_link_cost[lo][dt] && e < best_link_id[lo][dt])) {
                best_link_cost[lo][dt] = c;
                best_link_id[lo][dt] = e;
            }
        }
        // best over all tops at depth <= d: prefix minima.
        for (int v = 0; v < n; ++v)
            for (int dep = 1; dep <= inst.depth(v); ++dep)
                if (best_link_cost[v][dep - 1] < best_link_cost[v][dep] ||
                    (best_link_cost[v][dep - 1] == best_link_cost[v][dep] &&
                     best_link_id[v][dep - 1] >= 0 &&
                     (best_link_id[v][dep] < 0 ||
                      best_link_id[v][dep - 1] < best_link_id[v][dep]))) {
                    best_link_cost[v][dep] = best_link_cost[v][dep - 1];
                    best_link_id[v][dep] = best_link_id[v][dep - 1];
                }
    }

    int child_req(int c, int v) const {
        bool need = (target & (EdgeSet{1} << c)) != 0;
        return need ? inst.depth(v) : inst.depth(c);
    }

    void compute() {
        for (int v : inst.post_order()) {
            int dv = inst.depth(v);
            long long base = 0;
            for (int c : inst.children(v)) {
                long long gc = g[c][child_req(c, v)];
                base = (gc >= kInf || base >= kInf) ? kInf : base + gc;
            }
            g[v].assign(dv + 1, kInf);
            pick_link[v].assign(dv + 1, -1);
            pick_child[v].assign(dv + 1, -1);
            g[v][dv] = base;
            for (int d = dv - 1; d >= 0; --d) {
                long long best = kInf;
                int bl = -1, bc = -1;
                if (base < kInf && best_link_cost[v][d] < kInf) {
                    best = base + best_link_cost[v][d];
                    bl = best_link_id[v][d];
                }
                for (int c : inst.children(v)) {
                    long long co = g[c][child_req(c, v)];
                    if (co >= kInf || base >= kInf || g[c][d] >= kInf) continue;
                    long long cand = base - co + g[c][d];
                    if (cand < best) {
                        best = cand;
                        bl = -1;
                        bc = c;
                    }
                }
                g[v][d] = best;
                pick_link[v][d] = bl;
                pick_child[v][d] = bc;
            }
        }
    }

    void reconstruct(int v, int d, std::vector<int>& out) const {
        if (d < inst.depth(v)) {
            if (pick_link[v][d] >= 0) {
                out.push_back(pick_link[v][d]);
                d = inst.depth(v); // requirement handled; children get base reqs
            }
        }
        int delegate = (d < inst.depth(v)) ? pick_child[v][d] : -1;
        for (int c : inst.children(v))
            reconstruct(c, (c == delegate) ? d : child_req(c, v), out);
    }
};

} // namespace

ExactResult uplink_cover_dp(const TapInstance& inst, EdgeSet target) {
    ExactResult r;
    target &= inst.all_edges();
    if (target == 0) return r;
    UplinkDp dp(inst, target);
    dp.compute();
    long long v = dp.g[inst.root()][0];
    if (v >= kInf)
        fail(ErrorKind::Infeasible, "some target edge has no vertical cover");
    r.cost = v;
    dp.reconstruct(inst.root(), 0, r.links);
    std::sort(r.links.begin(), r.links.end());
    r.links.erase(std::unique(r.links.begin(), r.links.end()), r.links.end());
    check(covers(inst, r.links, target), "up-link cover reconstruction is not a cover");
    long long paid = 0;
    for (int e : r.links) paid += inst.link(e).cost;
    check(paid == r.cost, "up-link cover reconstruction cost mismatch");
    return r;
}

} // namespace tap
