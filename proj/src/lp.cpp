#include "tap/lp.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>

#include "tap/oracle.hpp"

namespace tap {

int LpModel::add_var(const Rat& c) {
    cost.push_back(c);
    has_upper.push_back(false);
    upper.push_back(Rat(0));
    return nvars++;
}

int LpModel::add_var(const Rat& c, const Rat& ub) {
    check(ub.sign() >= 0, "negative upper bound");
    cost.push_back(c);
    has_upper.push_back(true);
    upper.push_back(ub);
    return nvars++;
}

void LpModel::add_row(LpRow row) {
    std::vector<char> seen(nvars, 0);
    for (auto& [v, coef] : row.terms) {
        check(v >= 0 && v < nvars, "row references unknown variable");
        check(!seen[v], "row has a duplicate variable");
        seen[v] = 1;
        (void)coef;
    }
    rows.push_back(std::move(row));
}

std::string LpModel::dump() const {
    std::ostringstream os;
    os << "min";
    for (int j = 0; j < nvars; ++j)
        if (!cost[j].is_zero()) os << " + " << cost[j] << " x" << j;
    os << "\n";
    for (const LpRow& r : rows) {
        os << (r.tag.empty() ? "row" : r.tag) << ":";
        for (auto& [v, c] : r.terms) os << " + " << c << " x" << v;
        os << (r.sense == Sense::GE ? " >= " : r.sense == Sense::LE ? " <= " : " == ");
        os << r.rhs << "\n";
    }
    for (int j = 0; j < nvars; ++j) {
        os << "0 <= x" << j;
        if (has_upper[j]) os << " <= " << upper[j];
        os << "\n";
    }
    return os.str();
}

namespace {

// Full-tableau two-phase simplex with implicit variable bounds and Bland's
// rule.  Columns: structural, then one slack per inequality, then one
// artificial per row.  Exact rational arithmetic throughout.
struct Simplex {
    const LpModel& md;
    int m, nstruct, nslack, ncols, art0;
    std::vector<std::vector<Rat>> T; // m x ncols
    std::vector<Rat> d;              // reduced costs
    std::vector<Rat> val;            // values of basic variables
    std::vector<int> basis;          // per row: basic column
    std::vector<int> in_basis;       // per column: row or -1
    std::vector<char> at_upper, fixed, col_has_ub;
    std::vector<Rat> col_ub, cost2;
    std::vector<int> sign; // row normalization sign
    int pivots = 0;

    explicit Simplex(const LpModel& model) : md(model) {
        m = static_cast<int>(md.rows.size());
        nstruct = md.nvars;
        nslack = 0;
        for (const LpRow& r : md.rows)
            if (r.sense != Sense::EQ) ++nslack;
        ncols = nstruct + nslack + m;
        art0 = nstruct + nslack;

        T.assign(m, std::vector<Rat>(ncols, Rat(0)));
        col_has_ub.assign(ncols, 0);
        col_ub.assign(ncols, Rat(0));
        cost2.assign(ncols, Rat(0));
        for (int j = 0; j < nstruct; ++j) {
            col_has_ub[j] = md.has_upper[j] ? 1 : 0;
            col_ub[j] = md.upper[j];
            cost2[j] = md.cost[j];
        }
        sign.assign(m, 1);
        std::vector<Rat> b(m);
        int slack = nstruct;
        for (int i = 0; i < m; ++i) {
            const LpRow& r = md.rows[i];
            for (auto& [v, c] : r.terms) T[i][v] = c;
            b[i] = r.rhs;
            if (r.sense == Sense::GE)
                T[i][slack++] = Rat(-1);
            else if (r.sense == Sense::LE)
                T[i][slack++] = Rat(1);
            if (b[i].sign() < 0) {
                sign[i] = -1;
                for (int j = 0; j < ncols; ++j)
                    if (!T[i][j].is_zero()) T[i][j] = -T[i][j];
                b[i] = -b[i];
            }
            T[i][art0 + i] = Rat(1);
        }

        basis.resize(m);
        in_basis.assign(ncols, -1);
        val = b;
        at_upper.assign(ncols, 0);
        fixed.assign(ncols, 0);
        for (int j = 0; j < nstruct; ++j)
            if (col_has_ub[j] && col_ub[j].is_zero()) fixed[j] = 1;
        for (int i = 0; i < m; ++i) {
            basis[i] = art0 + i;
            in_basis[art0 + i] = i;
        }

        // Phase-1 reduced costs: artificial costs are 1, the rest 0.
        d.assign(ncols, Rat(0));
        for (int j = 0; j < art0; ++j) {
            Rat s;
            for (int i = 0; i < m; ++i) s += T[i][j];
            d[j] = -s;
        }
    }

    void pivot(int r, int j, const Rat& t, int dir) {
        Rat enter_val = (at_upper[j] ? col_ub[j] : Rat(0)) + (dir > 0 ? t : -t);
        for (int i = 0; i < m; ++i) {
            if (i == r || T[i][j].is_zero()) continue;
            val[i] -= (dir > 0 ? t : -t) * T[i][j];
        }
        Rat piv = T[r][j];
        for (int c = 0; c < ncols; ++c)
            if (!T[r][c].is_zero()) T[r][c] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == r || T[i][j].is_zero()) continue;
            Rat f = T[i][j];
            for (int c = 0; c < ncols; ++c)
                if (!T[r][c].is_zero()) T[i][c] -= f * T[r][c];
        }
        if (!d[j].is_zero()) {
            Rat f = d[j];
            for (int c = 0; c < ncols; ++c)
                if (!T[r][c].is_zero()) d[c] -= f * T[r][c];
        }
        in_basis[basis[r]] = -1;
        basis[r] = j;
        in_basis[j] = r;
        val[r] = enter_val;
        ++pivots;
    }

    // Returns true when optimal, throws on unbounded.
    void run() {
        constexpr int kPivotCap = 200000;
        while (true) {
            check(pivots < kPivotCap, "simplex pivot cap exceeded");
            int j = -1, dir = 0;
            for (int c = 0; c < ncols; ++c) {
                if (fixed[c] || in_basis[c] >= 0) continue;
                if (!at_upper[c] && d[c].sign() < 0) {
                    j = c;
                    dir = 1;
                    break;
                }
                if (at_upper[c] && d[c].sign() > 0) {
                    j = c;
                    dir = -1;
                    break;
                }
            }
            if (j < 0) return;

            bool have_t = false, leave_up = false;
            Rat tbest;
            int r = -1;
            for (int i = 0; i < m; ++i) {
                const Rat& a = T[i][j];
                if (a.is_zero()) continue;
                Rat da = (dir > 0) ? a : -a;
                if (da.sign() > 0) { // basic variable falls toward 0
                    Rat t = val[i] / da;
                    if (!have_t || t < tbest ||
                        (t == tbest && r >= 0 && basis[i] < basis[r])) {
                        have_t = true;
                        tbest = t;
                        r = i;
                        leave_up = false;
                    }
                } else if (col_has_ub[basis[i]]) { // basic variable rises to its bound
                    Rat t = (col_ub[basis[i]] - val[i]) / -da;
                    if (!have_t || t < tbest ||
                        (t == tbest && r >= 0 && basis[i] < basis[r])) {
                        have_t = true;
                        tbest = t;
                        r = i;
                        leave_up = true;
                    }
                }
            }
            if (col_has_ub[j] && (!have_t || col_ub[j] <= tbest)) {
                // Bound flip: the entering variable crosses to its other bound.
                Rat t = col_ub[j];
                for (int i = 0; i < m; ++i)
                    if (!T[i][j].is_zero()) val[i] -= (dir > 0 ? t : -t) * T[i][j];
                at_upper[j] = !at_upper[j];
                continue;
            }
            check(have_t, "LP is unbounded");
            int leaving = basis[r];
            pivot(r, j, tbest, dir);
            at_upper[leaving] = leave_up ? 1 : 0;
        }
    }

    Rat objective(const std::vector<Rat>& c) const {
        Rat z;
        for (int i = 0; i < m; ++i) z += c[basis[i]] * val[i];
        for (int jx = 0; jx < ncols; ++jx)
            if (in_basis[jx] < 0 && at_upper[jx]) z += c[jx] * col_ub[jx];
        return z;
    }

    void reset_costs(const std::vector<Rat>& c) {
        for (int j = 0; j < ncols; ++j) {
            if (in_basis[j] >= 0) {
                d[j] = Rat(0);
                continue;
            }
            Rat s = c[j];
            for (int i = 0; i < m; ++i)
                if (!T[i][j].is_zero()) s -= c[basis[i]] * T[i][j];
            d[j] = s;
        }
    }

    LpSolution solve() {
        std::vector<Rat> c1(ncols, Rat(0));
        for (int i = 0; i < m; ++i) c1[art0 + i] = Rat(1);
        run();
        if (objective(c1).sign() > 0) fail(ErrorKind::Infeasible, "LP has no feasible point");

        // Remove artificials from the basis where possible; leftover rows are
        // redundant and keep a zero-valued artificial.
        for (int i = 0; i < m; ++i) {
            if (basis[i] < art0) continue;
            for (int jx = 0; jx < art0; ++jx) {
                if (fixed[jx] || in_basis[jx] >= 0 || T[i][jx].is_zero()) continue;
                pivot(i, jx, Rat(0), at_upper[jx] ? -1 : 1);
                break;
            }
        }
        for (int jx = art0; jx < ncols; ++jx)
            if (in_basis[jx] < 0) fixed[jx] = 1;

        reset_costs(cost2);
        run();

        LpSolution sol;
        sol.pivots = pivots;
        sol.x.assign(nstruct, Rat(0));
        for (int j = 0; j < nstruct; ++j)
            if (in_basis[j] < 0 && at_upper[j]) sol.x[j] = col_ub[j];
        for (int i = 0; i < m; ++i)
            if (basis[i] < nstruct) sol.x[basis[i]] = val[i];
        sol.objective = Rat(0);
        for (int j = 0; j < nstruct; ++j) sol.objective += md.cost[j] * sol.x[j];
        sol.row_dual.assign(m, Rat(0));
        for (int i = 0; i < m; ++i) {
            Rat y;
            for (int k = 0; k < m; ++k)
                if (!T[k][art0 + i].is_zero()) y += cost2[basis[k]] * T[k][art0 + i];
            sol.row_dual[i] = (sign[i] > 0) ? y : -y;
        }
        sol.reduced_cost.assign(nstruct, Rat(0));
        for (int j = 0; j < nstruct; ++j) sol.reduced_cost[j] = md.cost[j];
        for (int i = 0; i < m; ++i) {
            if (sol.row_dual[i].is_zero()) continue;
            for (auto& [v, coef] : md.rows[i].terms) sol.reduced_cost[v] -= sol.row_dual[i] * coef;
        }
        return sol;
    }
};

void verify_solution(const LpModel& md, const LpSolution& sol) {
    check(static_cast<int>(sol.x.size()) == md.nvars, "solution size mismatch");
    for (int j = 0; j < md.nvars; ++j) {
        check(sol.x[j].sign() >= 0, "primal bound violated");
        if (md.has_upper[j]) check(sol.x[j] <= md.upper[j], "primal upper bound violated");
    }
    Rat dual_obj;
    for (size_t i = 0; i < md.rows.size(); ++i) {
        const LpRow& r = md.rows[i];
        Rat act;
        for (auto& [v, c] : r.terms) act += c * sol.x[v];
        const Rat& y = sol.row_dual[i];
        switch (r.sense) {
        case Sense::GE:
            check(act >= r.rhs, "primal row violated");
            check(y.sign() >= 0, "dual sign violated");
            break;
        case Sense::LE:
            check(act <= r.rhs, "primal row violated");
            check(y.sign() <= 0, "dual sign violated");
            break;
        case Sense::EQ:
            check(act == r.rhs, "primal row violated");
            break;
        }
        if (!y.is_zero()) check(act == r.rhs, "complementary slackness violated on a row");
        dual_obj += y * r.rhs;
    }
    Rat primal_obj;
    for (int j = 0; j < md.nvars; ++j) {
        primal_obj += md.cost[j] * sol.x[j];
        const Rat& dj = sol.reduced_cost[j];
        if (!md.has_upper[j]) {
            check(dj.sign() >= 0, "dual constraint violated");
            if (dj.sign() > 0) check(sol.x[j].is_zero(), "complementary slackness violated");
            continue;
        }
        if (dj.sign() > 0) check(sol.x[j].is_zero(), "complementary slackness violated");
        if (dj.sign() < 0) {
            check(sol.x[j] == md.upper[j], "complementary slackness violated at upper bound");
            dual_obj += dj * md.upper[j]; // w_j = -dj
        }
    }
    check(primal_obj == sol.objective, "objective mismatch");
    check(primal_obj == dual_obj, "strong duality violated");
}

} // namespace

LpSolution solve_lp(const LpModel& model) {
    Simplex s(model);
    LpSolution sol = s.solve();
    verify_solution(model, sol);
    return sol;
}

// ---- model builders -------------------------------------------------------

LpModel build_cut_lp(const TapInstance& inst) {
    std::vector<Rat> demand(inst.n(), Rat(1));
    return build_cut_lp(inst, demand, nullptr);
}

LpModel build_cut_lp(const TapInstance& inst, const std::vector<Rat>& demand,
                     const std::vector<char>* allowed) {
    check(static_cast<int>(demand.size()) == inst.n(), "demand vector size mismatch");
    LpModel md;
    for (int e = 0; e < inst.num_links(); ++e) {
        bool on = !allowed || (*allowed)[e];
        md.add_var(Rat(inst.link(e).cost), on ? Rat(1) : Rat(0));
    }
    for (int f = 0; f < inst.n(); ++f) {
        if (f == inst.root() || demand[f].sign() <= 0) continue;
        LpRow row;
        row.sense = Sense::GE;
        row.rhs = demand[f];
        row.tag = "cut:" + std::to_string(inst.id_of(f));
        for (int e : inst.covering_links(EdgeSet{1} << f)) row.terms.push_back({e, Rat(1)});
        md.add_row(std::move(row));
    }
    return md;
}

KBranchLp build_kbranch_lp(const TapInstance& inst, int k) {
    KBranchLp out;
    out.model = build_cut_lp(inst);
    out.branches = enumerate_branches(inst, k);
    for (const Branch& b : out.branches) {
        long long tau = solve_branch(inst, b).cost;
        out.tau.push_back(tau);
        LpRow row;
        row.sense = Sense::GE;
        row.rhs = Rat(tau);
        row.tag = "branch:" + std::to_string(inst.id_of(b.top)) + (b.whole_tree ? ":T" : "");
        for (int e : inst.covering_links(b.edges))
            row.terms.push_back({e, Rat(inst.link(e).cost)});
        out.model.add_row(std::move(row));
    }
    return out;
}

bool bunch3_valid(const TapInstance& inst, EdgeSet three_edges) {
    for (int u = 0; u < inst.n(); ++u)
        for (int v = u + 1; v < inst.n(); ++v)
            if ((inst.path_edges(u, v) & three_edges) == three_edges) return false;
    return true;
}

std::vector<EdgeSet> enumerate_bunches3(const TapInstance& inst) {
    std::vector<EdgeSet> paths;
    for (int u = 0; u < inst.n(); ++u)
        for (int v = u + 1; v < inst.n(); ++v) paths.push_back(inst.path_edges(u, v));
    std::vector<int> edges;
    for (int f = 0; f < inst.n(); ++f)
        if (f != inst.root()) edges.push_back(f);
    std::vector<EdgeSet> out;
    const int ne = static_cast<int>(edges.size());
    for (int a = 0; a < ne; ++a)
        for (int b = a + 1; b < ne; ++b)
            for (int c = b + 1; c < ne; ++c) {
                EdgeSet B = (EdgeSet{1} << edges[a]) | (EdgeSet{1} << edges[b]) |
                            (EdgeSet{1} << edges[c]);
                bool valid = true;
                for (EdgeSet p : paths)
                    if ((p & B) == B) {
                        valid = false;
                        break;
                    }
                if (valid) out.push_back(B);
            }
    return out;
}

namespace {

LpRow bunch3_row(const TapInstance& inst, EdgeSet B) {
    LpRow row;
    row.sense = Sense::GE;
    row.rhs = Rat(2);
    row.tag = "bunch3";
    for (int f = 0; f < inst.n(); ++f)
        if (B & (EdgeSet{1} << f)) row.tag += ":" + std::to_string(inst.id_of(f));
    for (int e : inst.covering_links(B)) row.terms.push_back({e, Rat(1)});
    return row;
}

} // namespace

Bunch3Lp build_bunch3_lp(const TapInstance& inst) {
    Bunch3Lp out;
    out.model = build_cut_lp(inst);
    out.bunches = enumerate_bunches3(inst);
    for (EdgeSet B : out.bunches) out.model.add_row(bunch3_row(inst, B));
    return out;
}

Bunch3Result solve_bunch3_lazy(const TapInstance& inst, int max_rounds) {
    std::vector<EdgeSet> all = enumerate_bunches3(inst);
    LpModel md = build_cut_lp(inst);
    Bunch3Result out;
    while (true) {
        check(++out.rounds <= max_rounds, "lazy bunch generation exceeds the round cap",
              ErrorKind::CapExceeded);
        out.sol = solve_lp(md);
        std::vector<int> support;
        for (int e = 0; e < inst.num_links(); ++e)
            if (out.sol.x[e].sign() > 0) support.push_back(e);
        EdgeSet best_bunch = 0;
        Rat best_val;
        for (EdgeSet B : all) {
            if (std::find(out.active_bunches.begin(), out.active_bunches.end(), B) !=
                out.active_bunches.end())
                continue;
            Rat s;
            for (int e : support)
                if (inst.cover_set(e) & B) s += out.sol.x[e];
            if (s < Rat(2) && (best_bunch == 0 || s < best_val)) {
                best_bunch = B;
                best_val = s;
            }
        }
        if (best_bunch == 0) return out;
        out.active_bunches.push_back(best_bunch);
        md.add_row(bunch3_row(inst, best_bunch));
    }
}

// ---- structure of extreme points -----------------------------------------

bool is_half_integral(const std::vector<Rat>& x) {
    for (const Rat& v : x)
        if (!v.is_zero() && v != Rat(1, 2) && v != Rat(1)) return false;
    return true;
}

HalfIntegralReport check_half_integral(const TapInstance& inst, const std::vector<Rat>& x) {
    check(static_cast<int>(x.size()) == inst.num_links(), "solution size mismatch");
    HalfIntegralReport rep;
    for (int e = 0; e < inst.num_links(); ++e) {
        bool integral = x[e].is_zero() || x[e] == Rat(1);
        if (!integral && x[e] != Rat(1, 2)) rep.violations.push_back(e);
        const Link& lk = inst.link(e);
        if ((lk.u == inst.root() || lk.v == inst.root()) && !integral)
            rep.r_violations.push_back(e);
    }
    rep.pass = rep.violations.empty() && rep.r_violations.empty();
    return rep;
}

namespace {

struct CrossGraph {
    std::vector<int> links;                               // positive cross links
    std::vector<std::vector<std::pair<int, int>>> adj;    // node -> (link, other)
    CrossGraph(const TapInstance& inst, const std::vector<Rat>& x) : adj(inst.n()) {
        for (int e = 0; e < inst.num_links(); ++e) {
            if (x[e].sign() <= 0) continue;
            if (inst.classify_link(e).kind != LinkKind::Cross) continue;
            links.push_back(e);
            adj[inst.link(e).u].push_back({e, inst.link(e).v});
            adj[inst.link(e).v].push_back({e, inst.link(e).u});
        }
    }
};

// Ordered link ids of some cycle in the positive cross graph, empty if forest.
std::vector<int> find_cross_cycle(const TapInstance& inst, const CrossGraph& g) {
    std::vector<int> state(inst.n(), 0); // 0 white, 1 on stack, 2 done
    std::vector<int> stack_nodes, stack_links;
    std::vector<int> cycle;

    // Recursive DFS via explicit lambda; the graph is tiny.
    auto dfs = [&](auto&& self, int v, int via_link) -> bool {
        state[v] = 1;
        stack_nodes.push_back(v);
        for (auto [e, w] : g.adj[v]) {
            if (e == via_link) continue;
            if (state[w] == 1) {
                size_t pos = 0;
                while (stack_nodes[pos] != w) ++pos;
                cycle.assign(stack_links.begin() + pos, stack_links.end());
                cycle.push_back(e);
                return true;
            }
            if (state[w] == 0) {
                stack_links.push_back(e);
                if (self(self, w, e)) return true;
                stack_links.pop_back();
            }
        }
        state[v] = 2;
        stack_nodes.pop_back();
        return false;
    };
    for (int v = 0; v < inst.n(); ++v) {
        if (state[v] != 0 || g.adj[v].empty()) continue;
        if (dfs(dfs, v, -1)) return cycle;
    }
    return {};
}

} // namespace

std::vector<CrossComponent> cross_cycle_audit(const TapInstance& inst,
                                              const std::vector<Rat>& x) {
    CrossGraph g(inst, x);
    std::vector<int> comp(inst.n(), -1);
    std::vector<CrossComponent> out;
    for (int s = 0; s < inst.n(); ++s) {
        if (comp[s] >= 0 || g.adj[s].empty()) continue;
        int id = static_cast<int>(out.size());
        out.push_back({});
        std::vector<int> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            ++out[id].nodes;
            for (auto [e, w] : g.adj[v])
                if (comp[w] < 0) {
                    comp[w] = id;
                    stack.push_back(w);
                }
        }
    }
    for (int e : g.links) out[comp[inst.link(e).u]].links.push_back(e);
    for (CrossComponent& c : out) {
        c.cycles = static_cast<int>(c.links.size()) - c.nodes + 1;
        if (c.cycles != 1) continue;
        // Peel leaves of the component; the remaining links form its cycle.
        std::map<int, int> deg;
        std::vector<char> alive(inst.num_links(), 0);
        for (int e : c.links) {
            alive[e] = 1;
            ++deg[inst.link(e).u];
            ++deg[inst.link(e).v];
        }
        bool changed = true;
        int remaining = static_cast<int>(c.links.size());
        while (changed) {
            changed = false;
            for (int e : c.links) {
                if (!alive[e]) continue;
                if (deg[inst.link(e).u] == 1 || deg[inst.link(e).v] == 1) {
                    alive[e] = 0;
                    --deg[inst.link(e).u];
                    --deg[inst.link(e).v];
                    --remaining;
                    changed = true;
                }
            }
        }
        c.cycle_length = remaining;
    }
    return out;
}

std::vector<Rat> eliminate_cross_cycles(const TapInstance& inst, std::vector<Rat> x) {
    check(static_cast<int>(x.size()) == inst.num_links(), "mass vector size mismatch");
    for (int guard = 0; guard <= inst.num_links(); ++guard) {
        CrossGraph g(inst, x);
        std::vector<int> cycle = find_cross_cycle(inst, g);
        if (cycle.empty()) return x;
        int pos = 0;
        for (size_t i = 1; i < cycle.size(); ++i)
            if (x[cycle[i]] < x[cycle[pos]] ||
                (x[cycle[i]] == x[cycle[pos]] && cycle[i] < cycle[pos]))
                pos = static_cast<int>(i);
        int ell = static_cast<int>(cycle.size());
        int star = cycle[pos];
        int prev = cycle[(pos + ell - 1) % ell];
        int next = cycle[(pos + 1) % ell];
        Rat mass = x[star];
        x[prev] += mass;
        if (ell > 2) x[next] += mass; // a two-cycle is a parallel pair: add once
        x[star] = Rat(0);
    }
    fail(ErrorKind::Internal, "cycle elimination failed to terminate");
}

int& uplink_fallback_count() {
    static int count = 0;
    return count;
}

ExactResult solve_uplink_cover(const TapInstance& inst, EdgeSet target) {
    ExactResult r;
    target &= inst.all_edges();
    if (target == 0) return r;

    std::vector<char> allowed(inst.num_links(), 0);
    std::vector<int> allowed_ids;
    for (int e = 0; e < inst.num_links(); ++e) {
        if (!inst.classify_link(e).up) continue;
        allowed[e] = 1;
        allowed_ids.push_back(e);
    }
    std::vector<Rat> demand(inst.n(), Rat(0));
    for (int f = 0; f < inst.n(); ++f)
        if (target & (EdgeSet{1} << f)) demand[f] = Rat(1);

    LpSolution sol = solve_lp(build_cut_lp(inst, demand, &allowed));
    bool integral = true;
    for (const Rat& v : sol.x)
        if (!v.is_zero() && v != Rat(1)) integral = false;
    if (!integral) {
        ++uplink_fallback_count();
        std::cerr << "tap: up-link cut LP returned a fractional vertex; "
                     "falling back to the exact solver\n";
        return solve_exact_subset(inst, target, caps().max_classes, &allowed_ids);
    }
    for (int e = 0; e < inst.num_links(); ++e) {
        if (sol.x[e].is_zero()) continue;
        r.links.push_back(e);
        r.cost += inst.link(e).cost;
    }
    check(covers(inst, r.links, target), "up-link LP vertex does not cover the target");
    check(Rat(r.cost) == sol.objective, "up-link LP vertex cost mismatch");
    return r;
}

} // namespace tap
