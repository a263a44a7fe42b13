#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <numeric>

#include "tap/lp.hpp"
#include "tap/oracle.hpp"

using namespace tap;

namespace {

struct Rng { // splitmix64
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    int uniform(int lo, int hi) { return lo + static_cast<int>(next() % (hi - lo + 1)); }
};

TapInstance random_feasible(Rng& rng, int n, int extra, long long max_cost) {
    while (true) {
        std::vector<long long> ids(n);
        std::iota(ids.begin(), ids.end(), 0);
        std::vector<int> parent(n, -1);
        for (int v = 1; v < n; ++v) parent[v] = rng.uniform(0, v - 1);
        std::vector<Link> links;
        for (int i = 0; i < extra; ++i) {
            int u = rng.uniform(0, n - 1);
            int v = rng.uniform(0, n - 1);
            if (u == v) continue;
            links.push_back({u, v, max_cost == 1 ? 1 : rng.uniform(1, static_cast<int>(max_cost))});
        }
        TapInstance t = TapInstance::build(std::move(ids), 0, std::move(parent), std::move(links));
        EdgeSet cov = 0;
        for (int e = 0; e < t.num_links(); ++e) cov |= t.cover_set(e);
        if (cov == t.all_edges()) return t;
    }
}

// Unit triangle on a 3-leaf star: the classic fractional cut instance.
TapInstance triangle_star() {
    return TapInstance::build({0, 1, 2, 3}, 0, {-1, 0, 0, 0}, {{1, 2, 1}, {2, 3, 1}, {3, 1, 1}});
}

} // namespace

TEST_CASE("simplex on tiny hand-solved programs") {
    {
        LpModel md;
        int x = md.add_var(Rat(1), Rat(1));
        int y = md.add_var(Rat(1), Rat(1));
        md.add_row({{{x, Rat(1)}, {y, Rat(1)}}, Sense::GE, Rat(1), "r1"});
        md.add_row({{{x, Rat(1)}, {y, Rat(2)}}, Sense::GE, Rat(3, 2), "r2"});
        auto s = solve_lp(md);
        CHECK(s.objective == Rat(1));
    }
    {
        LpModel md;
        int x = md.add_var(Rat(2), Rat(1));
        int y = md.add_var(Rat(1), Rat(1));
        md.add_row({{{x, Rat(1)}, {y, Rat(1)}}, Sense::GE, Rat(2), "r"});
        auto s = solve_lp(md);
        CHECK(s.objective == Rat(3));
        CHECK(s.x[x] == Rat(1));
        CHECK(s.x[y] == Rat(1));
    }
    {
        LpModel md;
        int x = md.add_var(Rat(5));
        md.add_row({{{x, Rat(3)}}, Sense::EQ, Rat(1), "eq"});
        auto s = solve_lp(md);
        CHECK(s.x[x] == Rat(1, 3));
        CHECK(s.objective == Rat(5, 3));
    }
    {
        LpModel md;
        int x = md.add_var(Rat(-1), Rat(2));
        md.add_row({{{x, Rat(1)}}, Sense::LE, Rat(3, 4), "le"});
        auto s = solve_lp(md);
        CHECK(s.x[x] == Rat(3, 4));
        CHECK(s.objective == Rat(-3, 4));
        CHECK(s.row_dual[0] == Rat(-1));
    }
    {
        LpModel md;
        int x = md.add_var(Rat(1), Rat(1));
        int y = md.add_var(Rat(1), Rat(1));
        md.add_row({{{x, Rat(1)}, {y, Rat(1)}}, Sense::GE, Rat(3), "r"});
        CHECK_THROWS_AS(solve_lp(md), Error);
    }
    {
        LpModel md;
        int x = md.add_var(Rat(-1)); // unbounded direction
        md.add_row({{{x, Rat(1)}}, Sense::GE, Rat(0), "r"});
        CHECK_THROWS_AS(solve_lp(md), Error);
    }
}

TEST_CASE("cut LP values on fixtures") {
    TapInstance s = TapInstance::build({0, 1, 2, 3}, 0, {-1, 0, 0, 0},
                                       {{1, 2, 1}, {2, 3, 2}, {3, 1, 3}, {0, 2, 5}});
    auto sol = solve_lp(build_cut_lp(s));
    CHECK(sol.objective == Rat(3));

    TapInstance tri = triangle_star();
    auto frac = solve_lp(build_cut_lp(tri));
    CHECK(frac.objective == Rat(3, 2));
    CHECK(is_half_integral(frac.x));
    CHECK(solve_exact(tri).cost == 2); // integrality gap 4/3 here

    // Forced upper bound: the only cover of one edge must take x = 1.
    TapInstance p = TapInstance::build({0, 1, 2}, 0, {-1, 0, 1}, {{0, 2, 1}, {1, 2, 1}});
    auto ps = solve_lp(build_cut_lp(p));
    CHECK(ps.x[0] == Rat(1));
    CHECK(ps.objective == Rat(1));
}

TEST_CASE("cut LP demand overload and allowed mask") {
    TapInstance tri = triangle_star();
    std::vector<Rat> demand(tri.n(), Rat(0));
    demand[1] = Rat(1, 2);
    auto sol = solve_lp(build_cut_lp(tri, demand, nullptr));
    CHECK(sol.objective == Rat(1, 2));

    std::vector<char> allowed = {1, 0, 1};
    std::vector<Rat> ones(tri.n(), Rat(1));
    auto sol2 = solve_lp(build_cut_lp(tri, ones, &allowed));
    CHECK(sol2.x[1].is_zero());
    CHECK(sol2.objective == Rat(2)); // links 12 and 31 at x=1
}

TEST_CASE("k-branch LP tightens the relaxation") {
    TapInstance tri = triangle_star();
    auto kb2 = build_kbranch_lp(tri, 2);
    CHECK(kb2.branches.size() == 3);
    CHECK(kb2.tau == std::vector<long long>{1, 1, 1});
    CHECK(solve_lp(kb2.model).objective == Rat(3, 2));

    auto kb4 = build_kbranch_lp(tri, 4);
    REQUIRE(kb4.branches.size() == 4);
    CHECK(kb4.branches[3].whole_tree);
    CHECK(kb4.tau[3] == 2);
    CHECK(solve_lp(kb4.model).objective == Rat(2)); // branch row closes the gap
}

TEST_CASE("bunch validity and the 3-bunch LP") {
    TapInstance tri = triangle_star();
    auto bunches = enumerate_bunches3(tri);
    REQUIRE(bunches.size() == 1);
    CHECK(bunches[0] == (EdgeSet{0b1110}));
    CHECK(bunch3_valid(tri, bunches[0]));

    TapInstance chain = TapInstance::build({0, 1, 2, 3}, 0, {-1, 0, 1, 2}, {{0, 3, 1}});
    CHECK(!bunch3_valid(chain, chain.all_edges())); // one path holds all three
    CHECK(enumerate_bunches3(chain).empty());

    auto full = solve_lp(build_bunch3_lp(tri).model);
    CHECK(full.objective == Rat(2));
    auto lazy = solve_bunch3_lazy(tri);
    CHECK(lazy.sol.objective == Rat(2));
    CHECK(lazy.active_bunches.size() == 1);
}

TEST_CASE("lazy bunch generation matches the full model on random instances") {
    Rng rng{81520261};
    int done = 0;
    while (done < 40) {
        int n = rng.uniform(3, 8);
        TapInstance t = random_feasible(rng, n, rng.uniform(n, 14), 1);
        auto lazy = solve_bunch3_lazy(t);
        auto full = solve_lp(build_bunch3_lp(t).model);
        CHECK(lazy.sol.objective == full.objective);

        // Sandwich: cut <= bunch <= exact optimum.
        auto cut = solve_lp(build_cut_lp(t));
        auto exact = solve_exact(t);
        CHECK(cut.objective <= lazy.sol.objective);
        CHECK(lazy.sol.objective <= Rat(exact.cost));
        ++done;
    }
}

TEST_CASE("k-branch LP sandwich on random weighted instances") {
    Rng rng{424242};
    int done = 0;
    while (done < 40) {
        int n = rng.uniform(3, 8);
        TapInstance t = random_feasible(rng, n, rng.uniform(n, 14), 5);
        auto cut = solve_lp(build_cut_lp(t));
        auto kb = build_kbranch_lp(t, rng.uniform(2, 4));
        auto sol = solve_lp(kb.model);
        auto exact = solve_exact(t);
        CHECK(cut.objective <= sol.objective);
        CHECK(sol.objective <= Rat(exact.cost));
        ++done;
    }
}

TEST_CASE("cross cycle audit and elimination") {
    TapInstance tri = triangle_star();
    std::vector<Rat> x{Rat(1, 2), Rat(1, 2), Rat(1, 2)};
    auto audit = cross_cycle_audit(tri, x);
    REQUIRE(audit.size() == 1);
    CHECK(audit[0].nodes == 3);
    CHECK(audit[0].links.size() == 3);
    CHECK(audit[0].cycles == 1);
    CHECK(audit[0].cycle_length == 3);

    auto y = eliminate_cross_cycles(tri, x);
    CHECK(y[0].is_zero());
    CHECK(y[1] == Rat(1));
    CHECK(y[2] == Rat(1));
    CHECK(cross_cycle_audit(tri, y)[0].cycles == 0);
    for (int f = 1; f <= 3; ++f) CHECK(tri.coverage(y, f) >= tri.coverage(x, f));

    // Parallel pair: a two-cycle, mass moves across once.
    TapInstance par = TapInstance::build({0, 1, 2}, 0, {-1, 0, 0},
                                         {{1, 2, 1}, {1, 2, 1}, {0, 1, 1}, {0, 2, 1}});
    std::vector<Rat> xp{Rat(1, 2), Rat(1, 3), Rat(0), Rat(0)};
    auto ap = cross_cycle_audit(par, xp);
    REQUIRE(ap.size() == 1);
    CHECK(ap[0].cycles == 1);
    CHECK(ap[0].cycle_length == 2);
    auto yp = eliminate_cross_cycles(par, xp);
    CHECK(yp[0] == Rat(5, 6));
    CHECK(yp[1].is_zero());
}

TEST_CASE("coverage never drops during cycle elimination") {
    Rng rng{777};
    int done = 0;
    while (done < 30) {
        int n = rng.uniform(3, 9);
        TapInstance t = random_feasible(rng, n, rng.uniform(n, 16), 3);
        auto sol = solve_lp(build_cut_lp(t));
        auto y = eliminate_cross_cycles(t, sol.x);
        for (int f = 0; f < t.n(); ++f) {
            if (f == t.root()) continue;
            CHECK(t.coverage(y, f) >= t.coverage(sol.x, f));
        }
        for (const auto& comp : cross_cycle_audit(t, y)) CHECK(comp.cycles == 0);
        ++done;
    }
}

TEST_CASE("up-link cover on a chain (LP route and DP route)") {
    TapInstance c = TapInstance::build(
        {0, 1, 2, 3}, 0, {-1, 0, 1, 2},
        {{3, 2, 1}, {3, 1, 3}, {2, 0, 2}, {1, 0, 1}, {3, 0, 10}});
    auto r = solve_uplink_cover(c, c.all_edges());
    CHECK(r.cost == 3);
    CHECK(r.links == std::vector<int>{0, 2});
    auto rdp = uplink_cover_dp(c, c.all_edges());
    CHECK(rdp.cost == 3);
    CHECK(rdp.links == std::vector<int>{0, 2});

    auto sub = solve_uplink_cover(c, c.path_edges(2, 3));
    CHECK(sub.cost == 1);
    CHECK(sub.links == std::vector<int>{0});

    TapInstance bare = TapInstance::build({0, 1, 2}, 0, {-1, 0, 1}, {{1, 2, 1}});
    CHECK_THROWS_AS(solve_uplink_cover(bare, bare.all_edges()), Error);
    CHECK_THROWS_AS(uplink_cover_dp(bare, bare.all_edges()), Error);
    CHECK(uplink_fallback_count() == 0);
}

TEST_CASE("up-link cover DP equals the up-restricted LP and brute force") {
    Rng rng{909090};
    int done = 0;
    while (done < 60) {
        int n = rng.uniform(3, 9);
        TapInstance t = random_feasible(rng, n, rng.uniform(n, 14), 4);
        std::vector<char> up(t.num_links(), 0);
        EdgeSet covered = 0;
        for (int e = 0; e < t.num_links(); ++e)
            if (t.classify_link(e).up) {
                up[e] = 1;
                covered |= t.cover_set(e);
            }
        if (covered != t.all_edges()) continue;
        auto dp = uplink_cover_dp(t, t.all_edges());

        std::vector<Rat> ones(t.n(), Rat(1));
        auto lp = solve_lp(build_cut_lp(t, ones, &up));
        CHECK(Rat(dp.cost) == lp.objective); // vertical path covering is integral

        auto viaLp = solve_uplink_cover(t, t.all_edges());
        CHECK(viaLp.cost == dp.cost);

        if (t.num_links() <= 16) {
            long long best = -1;
            for (std::uint32_t s = 0; s < (std::uint32_t{1} << t.num_links()); ++s) {
                EdgeSet cov = 0;
                long long cost = 0;
                for (int e = 0; e < t.num_links(); ++e)
                    if ((s >> e) & 1) {
                        if (!up[e]) { cov = 0; break; }
                        cov |= t.cover_set(e);
                        cost += t.link(e).cost;
                    }
                if ((cov & t.all_edges()) == t.all_edges() && (best < 0 || cost < best))
                    best = cost;
            }
            REQUIRE(best >= 0);
            CHECK(dp.cost == best);
        }
        ++done;
    }
}
