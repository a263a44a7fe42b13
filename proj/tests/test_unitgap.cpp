#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <numeric>

#include "tap/instance.hpp"
#include "tap/lp.hpp"
#include "tap/oracle.hpp"
#include "tap/unitgap.hpp"

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

TapInstance random_unit(Rng& rng, int n, int extra_links) {
    std::vector<long long> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<int> parent(n, -1);
    for (int v = 1; v < n; ++v) parent[v] = rng.uniform(0, v - 1);
    std::vector<Link> links;
    for (int i = 0; i < extra_links; ++i) {
        int u = rng.uniform(0, n - 1);
        int v = rng.uniform(0, n - 1);
        if (u == v) continue;
        links.push_back({u, v, 1});
    }
    TapInstance t = TapInstance::build(std::move(ids), 0, std::move(parent), links);
    EdgeSet got = 0;
    for (int e = 0; e < t.num_links(); ++e) got |= t.cover_set(e);
    for (int v = 1; v < n; ++v)
        if (!(got >> v & 1)) links.push_back({v, 0, 1});
    std::vector<long long> ids2(n);
    std::iota(ids2.begin(), ids2.end(), 0);
    std::vector<int> parent2(n, -1);
    for (int v = 1; v < n; ++v) parent2[v] = t.parent(v);
    return TapInstance::build(std::move(ids2), 0, std::move(parent2), std::move(links));
}

// Star with three leaves and a unit link triangle.
TapInstance triangle_star() {
    return TapInstance::build({0, 1, 2, 3}, 0, {-1, 0, 0, 0},
                              {{1, 2, 1}, {2, 3, 1}, {1, 3, 1}});
}

// Two twin pairs under their own stems, root links covering the stem edges.
TapInstance double_twin() {
    return TapInstance::build({0, 1, 2, 3, 4, 5, 6}, 0, {-1, 0, 0, 1, 1, 2, 2},
                              {{3, 4, 1}, {5, 6, 1}, {3, 0, 1}, {5, 0, 1}});
}

// Twin pair under node 2, a sibling leaf 5 joined to node 2 by a link, and a
// root link: the run needs one twin, one greedy and one subtree contraction.
TapInstance twin_then_greedy() {
    return TapInstance::build({0, 1, 2, 3, 4, 5}, 0, {-1, 0, 1, 2, 2, 1},
                              {{3, 4, 1}, {2, 5, 1}, {2, 0, 1}});
}

int count_kind(const ContractionTrace& tr, StepKind k) {
    int c = 0;
    for (const auto& s : tr.steps) c += s.kind == k ? 1 : 0;
    return c;
}

} // namespace

TEST_CASE("target ratios") {
    CHECK(dual_rho(DualMode::Cut2815) == Rat(28, 15));
    CHECK(dual_rho(DualMode::Bunch74) == Rat(7, 4));
}

TEST_CASE("iterative contraction requires unit costs") {
    TapInstance t = TapInstance::build({0, 1}, 0, {-1, 0}, {{1, 0, 2}});
    try {
        iterative_contraction(t);
        FAIL("general costs accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Malformed);
    }
}

TEST_CASE("star: matching, cover and both certificates match the worked example") {
    TapInstance star = triangle_star();
    UnitGapResult res = iterative_contraction(star);
    REQUIRE(res.trace.matching.size() == 1);
    CHECK(res.trace.matching[0] == std::pair<int, int>{1, 2});
    CHECK(res.trace.twins.empty());
    CHECK(res.trace.stems.empty());
    CHECK(res.closed_count == 2);
    CHECK(res.cost == 2);
    CHECK(covers(star, res.links, star.all_edges()));
    CHECK(solve_exact(star).cost == 2);

    DualCertificate cut = build_dual(res.trace, DualMode::Cut2815);
    CHECK(cut.pass);
    CHECK(cut.bunches.empty());
    CHECK(cut.y_edge[1] == Rat(4, 5));
    CHECK(cut.y_edge[2] == Rat(4, 5));
    CHECK(cut.y_edge[3] == Rat(1));
    CertificateReport cr = check_certificate(res.trace, cut);
    CHECK(cr.pass);
    CHECK(cr.dual_value == Rat(13, 5));
    CHECK(cr.lp_opt == Rat(3, 2));
    // the worked load: the link from leaf 3 to a matched leaf carries 1 + 4/5
    int ca = find_link(res.trace.closed, 1, 3);
    REQUIRE(ca >= 0);
    CHECK(Rat::parse(cr.dump["loads"][std::to_string(ca)].get<std::string>()) == Rat(27, 15));

    DualCertificate bunch = build_dual(res.trace, DualMode::Bunch74);
    CHECK(bunch.pass);
    CHECK(bunch.y_edge[1] == Rat(3, 4));
    CHECK(bunch.y_edge[2] == Rat(3, 4));
    CHECK(bunch.y_edge[3] == Rat(1));
    CertificateReport br = check_certificate(res.trace, bunch);
    CHECK(br.pass);
    CHECK(br.lp_opt == Rat(2));
    CHECK(Rat::parse(br.dump["loads"][std::to_string(ca)].get<std::string>()) == Rat(7, 4));
}

TEST_CASE("twin pairs are matched second and contracted with their stems") {
    TapInstance t = double_twin();
    UnitGapResult res = iterative_contraction(t);
    CHECK(res.trace.matching.empty());
    REQUIRE(res.trace.twins.size() == 2);
    CHECK(res.trace.twins[0] == std::pair<int, int>{3, 4});
    CHECK(res.trace.twins[1] == std::pair<int, int>{5, 6});
    REQUIRE(res.trace.stems.size() == 2);
    CHECK(res.trace.stems[0] == 1);
    CHECK(res.trace.stems[1] == 2);
    CHECK(count_kind(res.trace, StepKind::TwinInit) == 2);
    CHECK(res.closed_count == 4);
    CHECK(covers(t, res.links, t.all_edges()));
    CHECK(solve_exact(t).cost == 4);

    DualCertificate cut = build_dual(res.trace, DualMode::Cut2815);
    CHECK(cut.pass);
    CHECK(cut.y_edge[3] == Rat(14, 15));
    CHECK(cut.y_edge[1] >= Rat(2, 15)); // stem edge carries the twin surcharge
    CHECK(check_certificate(res.trace, cut).pass);

    DualCertificate bunch = build_dual(res.trace, DualMode::Bunch74);
    CHECK(bunch.pass);
    REQUIRE(bunch.bunches.size() == 2);
    for (const auto& b : bunch.bunches) {
        CHECK(b.y == Rat(1, 2));
        CHECK(bunch3_valid(res.trace.closed, b.edges));
    }
    CHECK(check_certificate(res.trace, bunch).pass);
}

TEST_CASE("a twin, a greedy join and a final subtree show up in one trace") {
    TapInstance t = twin_then_greedy();
    UnitGapResult res = iterative_contraction(t);
    CHECK(count_kind(res.trace, StepKind::TwinInit) == 1);
    CHECK(count_kind(res.trace, StepKind::Greedy) == 1);
    CHECK(count_kind(res.trace, StepKind::SemiClosed) == 1);
    CHECK(res.closed_count == 3);
    CHECK(covers(t, res.links, t.all_edges()));
    CHECK(solve_exact(t).cost == 3);

    DualCertificate cut = build_dual(res.trace, DualMode::Cut2815);
    CHECK(cut.pass);
    CertificateReport cr = check_certificate(res.trace, cut);
    CHECK(cr.pass);
    CHECK(cr.dual_value == Rat(3)); // tight: the dual pays exactly the cover

    DualCertificate bunch = build_dual(res.trace, DualMode::Bunch74);
    CHECK(bunch.pass);
    CHECK(check_certificate(res.trace, bunch).pass);
}

TEST_CASE("dangerous subtrees are recognized clause by clause") {
    // Root 0 holds subtree at 1: node 2 with leaves 4 (unmatched) and 5, and
    // leaf 3; pair (5,3) is matched, 4-5's shape makes contracting (4,3) keep
    // an off-path child, and 5 stays open through its link to outside leaf 6.
    TapInstance t = TapInstance::build({0, 1, 2, 3, 4, 5, 6}, 0, {-1, 0, 1, 1, 2, 2, 0},
                                       {{5, 3, 1}, {4, 3, 1}, {5, 6, 1}});
    ContractionTrace tr;
    tr.closed = t;
    ContractionState st = init_matching(t, tr);
    st.pairs = {{3, 5}};
    CHECK(is_dangerous(st, 1));
    CHECK(!is_dangerous(st, 2)); // pair split: not even a candidate shape
    CHECK(!is_dangerous(st, 0)); // whole tree: the unmatched leaf 6 joins in

    // Without the escape link at 5, the subtree closes and the danger is gone.
    TapInstance closed_t = TapInstance::build({0, 1, 2, 3, 4, 5, 6}, 0,
                                              {-1, 0, 1, 1, 2, 2, 0},
                                              {{5, 3, 1}, {4, 3, 1}, {6, 0, 1}, {2, 0, 1}});
    ContractionTrace tr2;
    tr2.closed = closed_t;
    ContractionState st2 = init_matching(closed_t, tr2);
    st2.pairs = {{3, 5}};
    CHECK(!is_dangerous(st2, 1));
}

TEST_CASE("contraction state bookkeeping stays consistent") {
    TapInstance t = twin_then_greedy();
    UnitGapResult res = iterative_contraction(t);
    // replaying the recorded trace lands on the same cover
    ContractionTrace replay;
    replay.closed = res.trace.closed;
    ContractionState st = init_matching(res.trace.closed, replay);
    CHECK(replay.twins == res.trace.twins);
    CHECK(replay.stems == res.trace.stems);
    greedy_contract_all(st, replay);
    CHECK(count_kind(replay, StepKind::Greedy) == 1);
    SemiClosedChoice ch = find_semiclosed(st);
    CHECK(ch.m_inside == 0);
    CHECK(ch.u_inside == 1);
    CHECK(ch.c_inside == 1); // the root counts as compound
    CHECK(static_cast<int>(ch.links.size()) <= ch.m_inside + ch.u_inside);
}

TEST_CASE("determinism: identical runs, identical certificates") {
    Rng rng{0x5eedc0de};
    TapInstance t = random_unit(rng, 8, 12);
    UnitGapResult a = iterative_contraction(t);
    UnitGapResult b = iterative_contraction(t);
    CHECK(a.links == b.links);
    CHECK(a.trace.cover_closed == b.trace.cover_closed);
    CHECK(a.trace.steps.size() == b.trace.steps.size());
    DualCertificate ca = build_dual(a.trace, DualMode::Cut2815);
    DualCertificate cb = build_dual(b.trace, DualMode::Cut2815);
    CHECK(ca.y_edge.size() == cb.y_edge.size());
    for (std::size_t i = 0; i < ca.y_edge.size(); ++i) CHECK(ca.y_edge[i] == cb.y_edge[i]);
}

TEST_CASE("corrupted certificates fail verification") {
    TapInstance star = triangle_star();
    UnitGapResult res = iterative_contraction(star);
    DualCertificate cut = build_dual(res.trace, DualMode::Cut2815);
    cut.y_edge[3] = Rat(3); // blows the load bound on every link through edge 3
    CertificateReport rep = check_certificate(res.trace, cut);
    CHECK(!rep.loads);
    CHECK(!rep.pass);
}

TEST_CASE("random unit suite: ratio bounds hold and certificates verify") {
    Rng rng{0xace17e57};
    int greedy_steps = 0;
    for (int it = 0; it < 24; ++it) {
        int n = rng.uniform(3, 9);
        TapInstance t = random_unit(rng, n, rng.uniform(n, 2 * n + 4));
        UnitGapResult res = iterative_contraction(t);
        CHECK(covers(t, res.links, t.all_edges()));
        greedy_steps += count_kind(res.trace, StepKind::Greedy);

        ExactResult exact = solve_exact(t);
        CHECK(res.cost >= exact.cost);

        // End-to-end gap bounds against the LPs, independent of any certificate.
        Rat cut_lp = solve_lp(build_cut_lp(t)).objective;
        Rat bunch_lp = solve_bunch3_lazy(t).sol.objective;
        CHECK(Rat(res.closed_count) <= Rat(28, 15) * cut_lp);
        CHECK(Rat(res.closed_count) <= Rat(7, 4) * bunch_lp);

        // The closure must not move either LP optimum.
        CHECK(solve_lp(build_cut_lp(res.trace.closed)).objective == cut_lp);
        CHECK(solve_bunch3_lazy(res.trace.closed).sol.objective == bunch_lp);

        DualCertificate cut = build_dual(res.trace, DualMode::Cut2815);
        CHECK(cut.pass);
        CertificateReport cr = check_certificate(res.trace, cut);
        CHECK(cr.pass);
        CHECK(cr.lp_opt == cut_lp);

        DualCertificate bunch = build_dual(res.trace, DualMode::Bunch74);
        CHECK(bunch.pass);
        CertificateReport br = check_certificate(res.trace, bunch);
        CHECK(br.pass);
        CHECK(br.lp_opt == bunch_lp);
    }
    CHECK(greedy_steps >= 0); // informational; the crafted fixture pins one down
}
