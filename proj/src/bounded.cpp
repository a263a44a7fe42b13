#include "tap/bounded.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <utility>

namespace tap {

namespace {

EdgeSet node_mask(const TapInstance& inst) {
    return inst.n() == 64 ? ~EdgeSet{0} : (EdgeSet{1} << inst.n()) - 1;
}

long long cover_cost(const TapInstance& inst, const std::vector<int>& links) {
    long long s = 0;
    for (int e : links) s += inst.link(e).cost;
    return s;
}

Rat total_mass(const TapInstance& inst, const std::vector<Rat>& x) {
    Rat s;
    for (int e = 0; e < inst.num_links(); ++e) s += Rat(inst.link(e).cost) * x[e];
    return s;
}

void sort_unique(std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Cost-weighted x-mass per link class.
struct ClassMass {
    Rat in, cross, r;
};

ClassMass class_masses(const TapInstance& inst, const std::vector<Rat>& x) {
    ClassMass m;
    for (int e = 0; e < inst.num_links(); ++e) {
        if (x[e].is_zero()) continue;
        Rat v = Rat(inst.link(e).cost) * x[e];
        switch (inst.classify_link(e).kind) {
            case LinkKind::In: m.in += v; break;
            case LinkKind::Cross: m.cross += v; break;
            case LinkKind::REdge: m.r += v; break;
        }
    }
    return m;
}

// Same tree, different link set.
TapInstance with_links(const TapInstance& inst, std::vector<Link> links) {
    std::vector<long long> ids;
    std::vector<int> parent;
    for (int v = 0; v < inst.n(); ++v) {
        ids.push_back(inst.id_of(v));
        parent.push_back(v == inst.root() ? -1 : inst.parent(v));
    }
    return TapInstance::build(std::move(ids), inst.root(), std::move(parent), std::move(links));
}

void require_cut_point(const TapInstance& inst, const std::vector<Rat>& x) {
    check(static_cast<int>(x.size()) == inst.num_links(), "point has wrong dimension",
          ErrorKind::Malformed);
    Rat zero, one(1);
    for (int e = 0; e < inst.num_links(); ++e)
        check(x[e] >= zero && x[e] <= one, "point violates the box constraints",
              ErrorKind::Malformed);
    for (int v = 0; v < inst.n(); ++v)
        if (v != inst.root())
            check(inst.coverage(x, v) >= one, "point is not in the cut polytope",
                  ErrorKind::Malformed);
}

} // namespace

Rat rho(CostMode mode) { return mode == CostMode::Unit ? Rat(8, 5) : Rat(12, 7); }

Rat pipeline_bound(const PipelineParams& params, long long max_cost) {
    Rat lm = params.lambda * Rat(max_cost);
    Rat k(params.k);
    check(k > lm, "pipeline bound requires k > lambda * max cost", ErrorKind::Malformed);
    return rho(params.mode) + Rat(8, 3) * lm / (k - lm) + Rat(2) / params.lambda;
}

std::pair<EdgeSet, EdgeSet> thin_thick_partition(const TapInstance& inst,
                                                 const std::vector<Rat>& x,
                                                 const Rat& lambda) {
    check(static_cast<int>(x.size()) == inst.num_links(), "point has wrong dimension",
          ErrorKind::Malformed);
    for (const Rat& v : x) check(v.sign() >= 0, "negative mass", ErrorKind::Malformed);
    EdgeSet thin = 0, thick = 0;
    for (int v = 0; v < inst.n(); ++v) {
        if (v == inst.root()) continue;
        (inst.coverage(x, v) <= lambda ? thin : thick) |= EdgeSet{1} << v;
    }
    return {thin, thick};
}

std::vector<int> cover_thick(const TapInstance& inst, const std::vector<Rat>& x,
                             const Rat& lambda, EdgeSet thick) {
    if (thick == 0) return {};
    check(lambda >= Rat(1), "lambda must be at least 1", ErrorKind::Malformed);
    for (int v = 0; v < inst.n(); ++v)
        if (thick >> v & 1)
            check(inst.coverage(x, v) > lambda, "edge in F' is not lambda-thick");
    // Split every link touching F' into its up-shadows; cover F' by up links.
    std::vector<Link> shadows;
    std::vector<int> src;
    for (int e = 0; e < inst.num_links(); ++e) {
        if (!(inst.cover_set(e) & thick)) continue;
        const Link& lk = inst.link(e);
        int l = inst.lca(lk.u, lk.v);
        for (int end : {lk.u, lk.v}) {
            if (end == l) continue;
            shadows.push_back(Link{end, l, lk.cost});
            src.push_back(e);
        }
    }
    TapInstance syn = with_links(inst, std::move(shadows));
    ExactResult up = solve_uplink_cover(syn, thick);
    std::vector<int> out;
    for (int j : up.links) out.push_back(src[j]);
    sort_unique(out);
    check(covers(inst, out, thick), "thick cover misses a thick edge");
    check(Rat(cover_cost(inst, out)) <= Rat(2) / lambda * total_mass(inst, x),
          "thick cover exceeded (2/lambda) * c^T x");
    return out;
}

SubtreeChoice find_min_k_lambda_subtree(const TapInstance& inst,
                                        const std::vector<Rat>& x, int k,
                                        const Rat& lambda) {
    check(inst.n() >= 2, "subtree search needs at least one edge");
    if (inst.leaf_count() < k) return {inst.root(), true};
    for (int v : inst.post_order()) {
        if (inst.subtree_leaf_count(v) < k) continue;
        if (v == inst.root() || inst.coverage(x, v) <= lambda) return {v, false};
    }
    fail(ErrorKind::Internal, "no (k,lambda)-subtree found although the root qualifies");
}

RoundingOutcome round1(const TapInstance& inst, const std::vector<Rat>& x) {
    check(static_cast<int>(x.size()) == inst.num_links(), "point has wrong dimension",
          ErrorKind::Malformed);
    RoundingOutcome out;
    std::vector<int> acc;
    for (int c : inst.children(inst.root())) {
        Branch b;
        b.top = c;
        b.edges = inst.subtree_nodes(c);
        b.leaf_count = inst.subtree_leaf_count(c);
        ExactResult jb = solve_branch(inst, b);
        Rat lhs;
        for (int e : inst.covering_links(b.edges)) lhs += Rat(inst.link(e).cost) * x[e];
        if (lhs < Rat(jb.cost)) {
            out.violated = ViolatedBranch{b, lhs, jb.cost};
            return out;
        }
        acc.insert(acc.end(), jb.links.begin(), jb.links.end());
    }
    sort_unique(acc);
    out.links = std::move(acc);
    out.cost = cover_cost(inst, out.links);
    check(covers(inst, out.links, inst.all_edges()), "round1 cover incomplete");
    ClassMass m = class_masses(inst, x);
    check(Rat(out.cost) <= m.in + Rat(2) * m.cross + m.r, "round1 exceeded C^in + 2C^cr + C^r");
    return out;
}

namespace {

std::vector<int> round2_general(const TapInstance& inst, const std::vector<Rat>& x) {
    // Spider restriction: drop every non-up in-link, adding its two up-shadows
    // (shadows of a link may be priced at the link's own cost).
    std::vector<Link> wlinks;
    std::vector<int> src;
    for (int e = 0; e < inst.num_links(); ++e) {
        const Link& lk = inst.link(e);
        LinkClass cls = inst.classify_link(e);
        if (cls.up || cls.kind != LinkKind::In) {
            wlinks.push_back(lk);
            src.push_back(e);
            continue;
        }
        int l = inst.lca(lk.u, lk.v);
        for (int end : {lk.u, lk.v}) {
            check(end != l, "non-up in-link with a degenerate shadow");
            wlinks.push_back(Link{end, l, lk.cost});
            src.push_back(e);
        }
    }
    TapInstance w = with_links(inst, std::move(wlinks));
    w.require_feasible(); // shadows keep every edge coverable
    LpSolution sol = solve_lp(build_cut_lp(w));
    HalfIntegralReport rep = check_half_integral(w, sol.x);
    check(rep.pass, "spider extreme point is not half-integral with integral root links");
    ClassMass m = class_masses(inst, x);
    Rat budget = Rat(2) * m.in + m.cross + m.r;
    check(sol.objective <= budget, "spider LP value exceeded the up-shifted budget");

    Rat one(1), half(1, 2);
    std::vector<int> picked, halves;
    EdgeSet covered = 0;
    for (int j = 0; j < w.num_links(); ++j) {
        if (sol.x[j] == one) {
            picked.push_back(j);
            covered |= w.cover_set(j);
        } else if (sol.x[j] == half) {
            halves.push_back(j);
        }
    }
    EdgeSet residual = w.all_edges() & ~covered;
    if (residual != 0) {
        ExactResult res = solve_exact_subset(w, residual, caps().max_classes, &halves);
        picked.insert(picked.end(), res.links.begin(), res.links.end());
    }
    std::vector<int> out;
    for (int j : picked) out.push_back(src[j]);
    sort_unique(out);
    check(covers(inst, out, inst.all_edges()), "round2 cover incomplete");
    check(Rat(cover_cost(inst, out)) <= Rat(4, 3) * budget,
          "round2 exceeded (4/3)(2C^in + C^cr + C^r)");
    return out;
}

std::vector<int> round2_unit(const TapInstance& inst, const std::vector<Rat>& x) {
    check(inst.unit_costs(), "unit rounding requires unit costs", ErrorKind::Malformed);
    ClassMass m = class_masses(inst, x);
    Rat budget = Rat(2) * m.in + Rat(4, 3) * m.cross + m.r;

    // Work on the shadow closure so that in-link mass can shift to up-shadows.
    ShadowClosure cl = shadow_close_unit(inst);
    const TapInstance& w = cl.inst;
    std::vector<Rat> xw(w.num_links());
    for (int e = 0; e < inst.num_links(); ++e) {
        if (x[e].is_zero()) continue;
        const Link& lk = inst.link(e);
        int j = find_link(w, lk.u, lk.v);
        check(j >= 0, "shadow closure lost an original pair");
        xw[j] += x[e];
    }
    // Stacked parallel mass may exceed the box; capping keeps every cut row
    // satisfied and only shrinks the class masses.
    for (Rat& v : xw)
        if (v > Rat(1)) v = Rat(1);

    // Re-optimize over the cut polytope with the in- and cross-class masses
    // pinned to their current values.  An extreme point of that polytope has a
    // cross support whose components carry at most one (odd) cycle, which is
    // what makes the peeling below terminate.
    Rat mass_in, mass_cr;
    std::vector<int> in_ids, cr_ids;
    for (int j = 0; j < w.num_links(); ++j) {
        switch (w.classify_link(j).kind) {
            case LinkKind::In: in_ids.push_back(j); mass_in += xw[j]; break;
            case LinkKind::Cross: cr_ids.push_back(j); mass_cr += xw[j]; break;
            case LinkKind::REdge: break;
        }
    }
    LpModel model = build_cut_lp(w);
    auto pin_class = [&](const std::vector<int>& ids, const Rat& total, const char* tag) {
        if (ids.empty()) return;
        LpRow row;
        row.sense = Sense::EQ;
        row.rhs = total;
        for (int j : ids) row.terms.push_back({j, Rat(1)});
        row.tag = tag;
        model.add_row(std::move(row));
    };
    pin_class(in_ids, mass_in, "mass:in");
    pin_class(cr_ids, mass_cr, "mass:cross");
    LpSolution sol = solve_lp(model);
    std::vector<Rat> xv = std::move(sol.x);
    Rat mass_r_before;
    for (int j = 0; j < w.num_links(); ++j)
        if (w.classify_link(j).kind == LinkKind::REdge) mass_r_before += xv[j];
    for (const CrossComponent& comp : cross_cycle_audit(w, xv)) {
        check(comp.cycles <= 1, "cross support component has more than one cycle");
        if (comp.cycles == 1)
            check(comp.cycle_length % 2 == 1, "cross support has an even cycle");
    }
    xv = eliminate_cross_cycles(w, std::move(xv));
    Rat mass_cr_after;
    for (int j : cr_ids) mass_cr_after += xv[j];
    check(mass_cr_after <= Rat(4, 3) * mass_cr, "cycle elimination grew past 4/3");

    xw = up_vector(w, xv, UpSplit::InOnly);
    Rat value;
    for (const Rat& v : xw) value += v;
    check(value <= Rat(2) * mass_in + Rat(4, 3) * mass_cr + mass_r_before,
          "up-shifted mass exceeded 2*in + (4/3)*cross + r");
    check(value <= budget, "up-shifted unit mass exceeded 2C^in + (4/3)C^cr + C^r");

    // Merge nested (or equal) covers onto the larger path, then repeatedly
    // peel leaves that carry no positive cross link via their unique up-link.
    TapInstance cur = w;
    std::vector<Rat> cx = std::move(xw);
    std::vector<int> tow(w.num_links());
    std::iota(tow.begin(), tow.end(), 0);
    std::vector<int> picked_w;
    long long peels = 0;

    auto merge_nested = [&]() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (int a = 0; a < cur.num_links() && !changed; ++a) {
                if (cx[a].is_zero()) continue;
                EdgeSet ca = cur.cover_set(a);
                for (int b = 0; b < cur.num_links(); ++b) {
                    if (b == a || cx[b].is_zero()) continue;
                    EdgeSet cb = cur.cover_set(b);
                    if ((ca & ~cb) != 0) continue;          // not contained
                    if (ca == cb && b > a) continue;        // equal covers keep the smaller id
                    cx[b] += cx[a];
                    cx[a] = Rat();
                    changed = true;
                    break;
                }
            }
        }
    };

    while (true) {
        merge_nested();
        if (cur.n() <= 1) break;
        int leaf = -1;
        for (int v = 0; v < cur.n() && leaf < 0; ++v) {
            if (!cur.is_leaf(v)) continue;
            bool has_cross = false;
            for (int e = 0; e < cur.num_links() && !has_cross; ++e) {
                if (cx[e].is_zero()) continue;
                const Link& lk = cur.link(e);
                if (lk.u != v && lk.v != v) continue;
                if (cur.classify_link(e).kind == LinkKind::Cross) has_cross = true;
            }
            if (!has_cross) leaf = v;
        }
        if (leaf < 0) break;
        std::vector<int> covering;
        for (int e = 0; e < cur.num_links(); ++e)
            if (!cx[e].is_zero() && (cur.cover_set(e) >> leaf & 1)) covering.push_back(e);
        check(covering.size() == 1, "peeled leaf lacks a unique positive up-link");
        int e = covering[0];
        check(cur.classify_link(e).up, "link peeled at a cross-free leaf is not an up-link");
        check(cx[e] >= Rat(1), "peeled up-link has value below one");
        picked_w.push_back(tow[e]);
        ++peels;
        const Link& lk = cur.link(e);
        ContractionResult ctr = contract(cur, cur.path_nodes(lk.u, lk.v));
        std::vector<Rat> ncx(ctr.inst.num_links());
        std::vector<int> ntow(ctr.inst.num_links());
        for (int j = 0; j < ctr.inst.num_links(); ++j) {
            ncx[j] = cx[ctr.src_link[j]];
            ntow[j] = tow[ctr.src_link[j]];
        }
        cur = std::move(ctr.inst);
        cx = std::move(ncx);
        tow = std::move(ntow);
    }

    // Terminal state: every remaining leaf carries a positive cross link, so
    // every surviving up- or r-link was nested inside some leaf's cross link
    // and has been merged away; the support is a nesting-free cross forest.
    // Each cross link is the disjoint union of its two root-path legs and the
    // legs are glued along a forest, so the cut matrix restricted to this
    // support is a network matrix: a basic optimum of the restricted
    // relaxation is 0/1, and its value is at most the surviving mass.
    Rat terminal_mass;
    std::vector<int> support_ids;
    for (int e = 0; e < cur.num_links(); ++e) {
        if (cx[e].is_zero()) continue;
        check(cur.classify_link(e).kind == LinkKind::Cross,
              "terminal support contains a non-cross link");
        support_ids.push_back(e);
        terminal_mass += cx[e];
    }
    long long support = 0;
    if (cur.n() > 1) {
        std::vector<Link> rest_links;
        for (int e : support_ids) rest_links.push_back(cur.link(e));
        TapInstance rest = with_links(cur, std::move(rest_links));
        LpSolution fin = solve_lp(build_cut_lp(rest));
        Rat zsum;
        for (std::size_t j = 0; j < support_ids.size(); ++j) {
            const Rat& zj = fin.x[j];
            check(zj.is_zero() || zj == Rat(1), "terminal relaxation vertex is fractional");
            if (zj.is_zero()) continue;
            picked_w.push_back(tow[support_ids[j]]);
            ++support;
            zsum += zj;
        }
        check(zsum <= terminal_mass, "terminal cover exceeded the surviving mass");
    }
    check(Rat(peels + support) <= value, "unit support exceeded the up-shifted mass");

    std::vector<int> out;
    for (int j : picked_w) out.push_back(cl.parent_link[j]);
    sort_unique(out);
    check(covers(inst, out, inst.all_edges()), "round2 unit cover incomplete");
    check(Rat(cover_cost(inst, out)) <= budget, "round2 exceeded 2C^in + (4/3)C^cr + C^r");
    return out;
}

} // namespace

std::vector<int> round2(const TapInstance& inst, const std::vector<Rat>& x, CostMode mode) {
    require_cut_point(inst, x);
    return mode == CostMode::Unit ? round2_unit(inst, x) : round2_general(inst, x);
}

RoundingOutcome cover_subtree(const TapInstance& inst, const std::vector<Rat>& x,
                              EdgeSet shat_nodes, EdgeSet sprime_nodes,
                              const PipelineParams& params) {
    check((sprime_nodes & ~shat_nodes) == 0, "S' must sit inside the chosen subtree");
    EdgeSet region = (node_mask(inst) & ~shat_nodes) | sprime_nodes;
    ContractionResult ctr = contract(inst, region);
    const TapInstance& sub = ctr.inst;
    std::vector<Rat> xs(sub.num_links());
    for (int j = 0; j < sub.num_links(); ++j) xs[j] = x[ctr.src_link[j]];

    // Every branch hanging on the piece root must have < k leaves (minimality
    // of the chosen subtree guarantees it); validated here.
    for (int c : sub.children(sub.root()))
        check(sub.subtree_leaf_count(c) < params.k,
              "piece has a branch with too many leaves");

    RoundingOutcome r1 = round1(sub, xs);
    if (r1.violated) {
        // Re-express in `inst` coordinates; the transfer is exact.
        const ViolatedBranch& vb = *r1.violated;
        Branch b;
        b.top = ctr.src_node[vb.branch.top];
        b.edges = inst.subtree_nodes(b.top);
        b.leaf_count = inst.subtree_leaf_count(b.top);
        b.whole_tree = (b.top == inst.root());
        Rat lhs;
        for (int e : inst.covering_links(b.edges)) lhs += Rat(inst.link(e).cost) * x[e];
        long long rhs = solve_exact_subset(inst, b.edges).cost;
        check(lhs == vb.lhs && rhs == vb.rhs, "branch violation did not transfer exactly");
        check(lhs < Rat(rhs), "lifted branch inequality is not violated");
        RoundingOutcome out;
        out.violated = ViolatedBranch{b, lhs, rhs};
        return out;
    }

    std::vector<int> j2 = round2(sub, xs, params.mode);
    long long c2 = cover_cost(sub, j2);
    const std::vector<int>& pick = (r1.cost <= c2) ? r1.links : j2;
    long long picked_cost = std::min(r1.cost, c2);

    Rat nonroot, rootm;
    for (int e = 0; e < sub.num_links(); ++e) {
        if (xs[e].is_zero()) continue;
        Rat v = Rat(sub.link(e).cost) * xs[e];
        (sub.classify_link(e).kind == LinkKind::REdge ? rootm : nonroot) += v;
    }
    check(Rat(picked_cost) <= rho(params.mode) * nonroot + Rat(4, 3) * rootm,
          "cover_subtree exceeded rho * gamma-mass + (4/3) * root-mass");

    RoundingOutcome out;
    for (int j : pick) out.links.push_back(ctr.src_link[j]);
    sort_unique(out.links);
    out.cost = cover_cost(inst, out.links);
    check(out.cost == picked_cost, "contraction changed the piece cost");
    check(covers(inst, out.links, shat_nodes & ~sprime_nodes), "piece cover incomplete");
    return out;
}

OuterResult outer_iteration(const TapInstance& inst, const std::vector<Rat>& x,
                            const PipelineParams& params) {
    check(params.k >= 2, "k must be at least 2", ErrorKind::Malformed);
    check(params.lambda >= Rat(1) && params.lambda <= Rat(params.k - 1),
          "lambda must satisfy 1 <= lambda <= k-1", ErrorKind::Malformed);
    require_cut_point(inst, x);

    OuterResult out;
    out.trace["algorithm"] = "outer-iteration";
    out.trace["k"] = params.k;
    out.trace["lambda"] = params.lambda.str();
    out.trace["mode"] = params.mode == CostMode::Unit ? "unit" : "general";
    out.trace["passes"] = nlohmann::json::array();

    const Rat lam = params.lambda;
    const long long max_cost = inst.max_cost();
    const Rat lm = lam * Rat(max_cost);
    const Rat rho_m = rho(params.mode);
    const bool bounded = Rat(params.k) > lm;
    const Rat ledger_bound = bounded ? rho_m + Rat(8, 3) * lm / (Rat(params.k) - lm) : Rat();

    TapInstance cur = inst;
    std::vector<Rat> cx = x;
    std::vector<int> src_node(inst.n());
    std::iota(src_node.begin(), src_node.end(), 0);
    std::vector<int> src_link(inst.num_links());
    std::iota(src_link.begin(), src_link.end(), 0);
    std::vector<int> acc;
    EdgeSet fprime = 0;
    int pass = 0;

    while (cur.n() >= 2) {
        check(++pass <= inst.n() + 2, "outer iteration failed to terminate");
        SubtreeChoice ch = find_min_k_lambda_subtree(cur, cx, params.k, lam);
        EdgeSet shat = cur.subtree_nodes(ch.top);
        EdgeSet sprime = EdgeSet{1} << ch.top;
        std::vector<int> bfs{ch.top};
        for (size_t i = 0; i < bfs.size(); ++i)
            for (int w : cur.children(bfs[i]))
                if (cur.coverage(cx, w) > lam) {
                    sprime |= EdgeSet{1} << w;
                    bfs.push_back(w);
                }

        RoundingOutcome piece;
        if (shat != sprime) piece = cover_subtree(cur, cx, shat, sprime, params);

        if (piece.violated) {
            const ViolatedBranch& vb = *piece.violated;
            Branch b;
            b.top = src_node[vb.branch.top];
            b.edges = inst.subtree_nodes(b.top);
            b.leaf_count = inst.subtree_leaf_count(b.top);
            b.whole_tree = (b.top == inst.root());
            Rat lhs;
            for (int e : inst.covering_links(b.edges)) lhs += Rat(inst.link(e).cost) * x[e];
            long long rhs = solve_exact_subset(inst, b.edges).cost;
            if (!(lhs < Rat(rhs)))
                fail(ErrorKind::Internal, "violated branch did not lift to the original instance");
            out.trace["passes"].push_back({{"pass", pass},
                                           {"violatedBranchTop", inst.id_of(b.top)},
                                           {"lhs", lhs.str()},
                                           {"tau", rhs}});
            out.outcome.violated = ViolatedBranch{b, lhs, rhs};
            return out;
        }

        // Ledger bookkeeping for this pass.
        Rat delta;
        for (int e = 0; e < cur.num_links(); ++e) {
            if (cx[e].is_zero()) continue;
            const Link& lk = cur.link(e);
            if ((shat >> lk.u & 1) && (shat >> lk.v & 1)) delta += Rat(lk.cost) * cx[e];
        }
        Rat parent_mass;
        if (ch.top != cur.root())
            for (int e : cur.covering_links(EdgeSet{1} << ch.top))
                parent_mass += Rat(cur.link(e).cost) * cx[e];

        check(Rat(piece.cost) <= rho_m * delta + Rat(4, 3) * parent_mass,
              "pass cost exceeded rho * delta + (4/3) * parent mass");
        if (!ch.small_case) {
            if (ch.top != cur.root()) {
                check(parent_mass <= lm, "thin parent edge mass exceeded lambda * M");
                check(Rat(2) * delta + parent_mass >= Rat(params.k),
                      "leaf mass bound failed: 2*delta + parent mass < k");
            }
            check(Rat(2) * delta >= Rat(params.k) - lm, "delta fell below (k - lambda*M)/2");
        }
        if (bounded)
            check(Rat(piece.cost) <= ledger_bound * delta,
                  "pass ledger exceeded rho + (8/3)*lambda*M/(k - lambda*M)");

        for (int e : piece.links) acc.push_back(src_link[e]);
        int thick_added = 0;
        for (int w : bfs)
            if (w != ch.top) {
                fprime |= EdgeSet{1} << src_node[w];
                ++thick_added;
            }
        out.trace["passes"].push_back({{"pass", pass},
                                       {"top", inst.id_of(src_node[ch.top])},
                                       {"smallCase", ch.small_case},
                                       {"subtreeNodes", std::popcount(shat)},
                                       {"delta", delta.str()},
                                       {"parentMass", parent_mass.str()},
                                       {"costAdded", piece.cost},
                                       {"thickEdges", thick_added}});

        ContractionResult ctr = contract(cur, shat);
        std::vector<Rat> ncx(ctr.inst.num_links());
        std::vector<int> nsrc_link(ctr.inst.num_links());
        for (int j = 0; j < ctr.inst.num_links(); ++j) {
            ncx[j] = cx[ctr.src_link[j]];
            nsrc_link[j] = src_link[ctr.src_link[j]];
        }
        std::vector<int> nsrc_node(ctr.inst.n());
        for (int v = 0; v < ctr.inst.n(); ++v) nsrc_node[v] = src_node[ctr.src_node[v]];
        cur = std::move(ctr.inst);
        cx = std::move(ncx);
        src_link = std::move(nsrc_link);
        src_node = std::move(nsrc_node);
    }

    for (int v = 0; v < inst.n(); ++v)
        if (fprime >> v & 1)
            check(inst.coverage(x, v) > lam, "accumulated edge is not thick in the input");
    std::vector<int> jthick = cover_thick(inst, x, lam, fprime);
    acc.insert(acc.end(), jthick.begin(), jthick.end());
    sort_unique(acc);
    out.outcome.links = std::move(acc);
    out.outcome.cost = cover_cost(inst, out.outcome.links);
    check(covers(inst, out.outcome.links, inst.all_edges()), "outer cover incomplete");
    Rat mass = total_mass(inst, x);
    out.trace["thickEdges"] = std::popcount(fprime);
    out.trace["thickCost"] = cover_cost(inst, jthick);
    out.trace["totalCost"] = out.outcome.cost;
    out.trace["fractionalMass"] = mass.str();
    if (bounded) {
        Rat bound = (ledger_bound + Rat(2) / lam) * mass;
        check(Rat(out.outcome.cost) <= bound, "outer iteration exceeded the pipeline bound");
        out.trace["bound"] = bound.str();
    }
    return out;
}

DriverResult lazy_kbranch_driver(const TapInstance& inst, const PipelineParams& params) {
    DriverResult out;
    out.trace["algorithm"] = "lazy-kbranch";
    out.trace["rounds"] = nlohmann::json::array();
    if (inst.n() < 2) {
        out.lp_value = Rat();
        out.ratio = Rat(1);
        return out;
    }
    inst.require_feasible();

    LpModel model = build_cut_lp(inst);
    std::set<EdgeSet> added;
    const int guard = inst.n() + 3;
    for (int round = 0;; ++round) {
        check(round < guard, "cutting-plane driver failed to converge");
        LpSolution sol = solve_lp(model);
        OuterResult res = outer_iteration(inst, sol.x, params);
        nlohmann::json entry{{"round", round}, {"lp", sol.objective.str()}};
        entry["outer"] = res.trace;
        if (res.outcome.violated) {
            const ViolatedBranch& vb = *res.outcome.violated;
            check(added.insert(vb.branch.edges).second, "duplicate branch row reported");
            LpRow row;
            row.sense = Sense::GE;
            row.rhs = Rat(vb.rhs);
            for (int e : inst.covering_links(vb.branch.edges))
                row.terms.push_back({e, Rat(inst.link(e).cost)});
            row.tag = "branch@" + std::to_string(inst.id_of(vb.branch.top));
            model.add_row(std::move(row));
            ++out.rows_added;
            entry["addedRow"] = "branch@" + std::to_string(inst.id_of(vb.branch.top));
            out.trace["rounds"].push_back(std::move(entry));
            continue;
        }
        out.trace["rounds"].push_back(std::move(entry));
        out.links = res.outcome.links;
        out.cost = res.outcome.cost;
        out.lp_value = sol.objective;
        check(!sol.objective.is_zero(), "LP value vanished on a nonempty tree");
        out.ratio = Rat(out.cost) / sol.objective;
        if (Rat(params.k) > params.lambda * Rat(inst.max_cost())) {
            Rat bound = pipeline_bound(params, inst.max_cost());
            check(out.ratio <= bound, "driver ratio exceeded the certified bound");
            out.trace["bound"] = bound.str();
        }
        out.trace["ratio"] = out.ratio.str();
        out.trace["rowsAdded"] = out.rows_added;
        return out;
    }
}

namespace {

// Re-root the same tree (same node indices, same links) at `newroot`.
TapInstance rerooted(const TapInstance& inst, int newroot) {
    std::vector<int> parent(inst.n(), -1);
    std::vector<char> seen(inst.n(), 0);
    std::vector<int> stack{newroot};
    seen[newroot] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        std::vector<int> nbrs = inst.children(v);
        if (v != inst.root()) nbrs.push_back(inst.parent(v));
        for (int w : nbrs) {
            if (seen[w]) continue;
            seen[w] = 1;
            parent[w] = v;
            stack.push_back(w);
        }
    }
    std::vector<long long> ids;
    for (int v = 0; v < inst.n(); ++v) ids.push_back(inst.id_of(v));
    std::vector<Link> links(inst.links().begin(), inst.links().end());
    return TapInstance::build(std::move(ids), newroot, std::move(parent), std::move(links));
}

// Deterministic diametral path: lexicographically smallest endpoint pair.
std::vector<int> diametral_path(const TapInstance& inst) {
    int n = inst.n();
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
    for (int s = 0; s < n; ++s) {
        dist[s][s] = 0;
        std::vector<int> queue{s};
        for (size_t i = 0; i < queue.size(); ++i) {
            int v = queue[i];
            std::vector<int> nbrs = inst.children(v);
            if (v != inst.root()) nbrs.push_back(inst.parent(v));
            for (int w : nbrs)
                if (dist[s][w] < 0) {
                    dist[s][w] = dist[s][v] + 1;
                    queue.push_back(w);
                }
        }
    }
    int best_a = 0, best_b = 0, d = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (dist[a][b] > d) {
                d = dist[a][b];
                best_a = a;
                best_b = b;
            }
    check(d == inst.diameter(), "diameter disagreement");
    // Path best_a -> lca -> best_b in rooted coordinates.
    std::vector<int> up_a, up_b;
    int l = inst.lca(best_a, best_b);
    for (int v = best_a; v != l; v = inst.parent(v)) up_a.push_back(v);
    up_a.push_back(l);
    for (int v = best_b; v != l; v = inst.parent(v)) up_b.push_back(v);
    std::reverse(up_b.begin(), up_b.end());
    up_a.insert(up_a.end(), up_b.begin(), up_b.end());
    return up_a;
}

ExactResult solve_diam_rec(const TapInstance& inst, int depth) {
    check(depth <= 4, "diameter recursion too deep");
    if (inst.n() <= 1) return {};
    int d = inst.diameter();
    if (d <= 2) return solve_exact(inst);

    if (d % 2 == 1) {
        // Guess the solution link covering the central edge, in id order.
        std::vector<int> path = diametral_path(inst);
        int a = path[d / 2], b = path[d / 2 + 1];
        int central = (inst.parent(a) == b) ? a : b;
        check(inst.parent(central) == (central == a ? b : a), "central edge endpoints disagree");
        ExactResult best;
        best.cost = -1;
        for (int e = 0; e < inst.num_links(); ++e) {
            if (!(inst.cover_set(e) >> central & 1)) continue;
            const Link& lk = inst.link(e);
            ContractionResult ctr = contract(inst, inst.path_nodes(lk.u, lk.v));
            check(ctr.inst.diameter() <= d - 1, "guess contraction kept the diameter");
            ExactResult rest = solve_diam_rec(ctr.inst, depth + 1);
            long long total = lk.cost + rest.cost;
            if (best.cost >= 0 && total >= best.cost) continue;
            best.cost = total;
            best.links = {e};
            for (int j : rest.links) best.links.push_back(ctr.src_link[j]);
        }
        check(best.cost >= 0, "no link covers the central edge");
        sort_unique(best.links);
        return best;
    }

    // Even diameter (4 or 6): re-root at the unique center, then take the
    // better of per-branch solves and a spider-restricted exact solve.
    std::vector<int> path = diametral_path(inst);
    TapInstance rt = rerooted(inst, path[d / 2]);

    std::vector<int> branchwise;
    long long branch_cost = 0;
    for (int c : rt.children(rt.root())) {
        EdgeSet bedges = rt.subtree_nodes(c);
        ContractionResult ctr = contract(rt, node_mask(rt) & ~bedges);
        if (ctr.inst.diameter() <= 3) {
            ExactResult er = solve_exact_subset(rt, bedges);
            branchwise.insert(branchwise.end(), er.links.begin(), er.links.end());
        } else {
            check(ctr.inst.diameter() <= d - 1, "branch piece kept the diameter");
            ExactResult er = solve_diam_rec(ctr.inst, depth + 1);
            for (int j : er.links) branchwise.push_back(ctr.src_link[j]);
        }
    }
    sort_unique(branchwise);
    branch_cost = cover_cost(rt, branchwise);
    check(covers(rt, branchwise, rt.all_edges()), "branch-wise cover incomplete");

    ShadowCompletion mc = shadow_complete(rt);
    std::vector<Link> spider;
    std::vector<int> sidx;
    for (int j = 0; j < mc.inst.num_links(); ++j) {
        LinkClass cls = mc.inst.classify_link(j);
        if (!cls.up && cls.kind == LinkKind::In) continue;
        spider.push_back(mc.inst.link(j));
        sidx.push_back(j);
    }
    TapInstance sp = with_links(rt, std::move(spider));
    sp.require_feasible(); // every edge is covered by its (node, center) pair
    ExactResult se = solve_exact(sp);
    std::vector<int> spick;
    for (int j : se.links)
        for (int orig : mc.expansion[sidx[j]]) spick.push_back(orig);
    sort_unique(spick);
    long long spider_cost = cover_cost(rt, spick);
    check(covers(rt, spick, rt.all_edges()), "spider cover incomplete");
    check(spider_cost <= se.cost, "expansion exceeded the completed cost");

    ExactResult out;
    if (branch_cost <= spider_cost) {
        out.links = std::move(branchwise);
        out.cost = branch_cost;
    } else {
        out.links = std::move(spick);
        out.cost = spider_cost;
    }
    return out;
}

} // namespace

DiamResult solve_diameter_le7(const TapInstance& inst) {
    int d = inst.diameter();
    check(d <= 7, "tree diameter exceeds 7", ErrorKind::Malformed);
    if (inst.n() >= 2) inst.require_feasible();
    ExactResult exact = solve_exact(inst);
    ExactResult mine = solve_diam_rec(inst, 0);
    DiamResult out;
    out.links = std::move(mine.links);
    out.cost = mine.cost;
    out.exact = exact.cost;
    out.certified = d <= 5 ? Rat(3, 2) : Rat(9, 5);
    out.ratio = exact.cost == 0 ? Rat(1) : Rat(out.cost) / Rat(out.exact);
    check(out.cost >= out.exact, "diameter solver beat the exact optimum");
    check(covers(inst, out.links, inst.all_edges()), "diameter cover incomplete");
    check(out.ratio <= out.certified, "diameter solver exceeded its certified ratio");
    return out;
}

} // namespace tap
