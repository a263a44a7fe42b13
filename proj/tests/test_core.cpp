#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tap/instance.hpp"
#include "tap/rational.hpp"

using namespace tap;

namespace {

EdgeSet bits(std::initializer_list<int> is) {
    EdgeSet s = 0;
    for (int i : is) s |= EdgeSet{1} << i;
    return s;
}

// Star: root 0 with children 1, 2, 3.
TapInstance star() {
    return TapInstance::build({0, 1, 2, 3}, 0, {-1, 0, 0, 0},
                              {{1, 2, 1}, {2, 3, 2}, {3, 1, 3}, {0, 2, 5}});
}

// Path: 0 - 1 - 2 rooted at 0.
TapInstance path3(std::vector<Link> links) {
    return TapInstance::build({0, 1, 2}, 0, {-1, 0, 1}, std::move(links));
}

// Caterpillar: 0 - 1 - 2 - 3 with extra child 4 under 1.
TapInstance cat() {
    return TapInstance::build({10, 11, 12, 13, 14}, 0, {-1, 0, 1, 2, 1},
                              {{2, 3, 1}, {3, 4, 1}, {0, 3, 1}});
}

} // namespace

TEST_CASE("rational arithmetic is exact") {
    Rat a = Rat::parse("2/3");
    Rat b = Rat::parse("1/6");
    CHECK(a + b == Rat::parse("5/6"));
    CHECK(a - b == Rat(1, 2));
    CHECK(a * b == Rat(1, 9));
    CHECK(a / b == Rat(4));
    CHECK((a + b + b) == Rat(1));
    CHECK(Rat(1, 3) + Rat(1, 3) + Rat(1, 3) == Rat(1));
    CHECK(Rat(28, 15) > Rat(9, 5));
    CHECK(Rat(7, 4) < Rat(9, 5));
    CHECK(Rat(-2, 4).str() == "-1/2");
    CHECK(Rat(8, 2).str() == "4");
    CHECK(Rat(6, 4).is_integer() == false);
    CHECK(Rat(6, 3).as_int() == 2);
    CHECK_THROWS_AS(Rat(1, 0), Error);
}

TEST_CASE("tree structure on the star") {
    TapInstance t = star();
    CHECK(t.n() == 4);
    CHECK(t.root() == 0);
    CHECK(t.leaves() == std::vector<int>{1, 2, 3});
    CHECK(t.leaf_count() == 3);
    CHECK(t.diameter() == 2);
    CHECK(t.depth(2) == 1);
    CHECK(t.lca(1, 3) == 0);
    CHECK(t.is_ancestor(0, 3));
    CHECK(!t.is_ancestor(1, 3));
    CHECK(t.all_edges() == bits({1, 2, 3}));
    CHECK(t.path_edges(1, 2) == bits({1, 2}));
    CHECK(t.path_nodes(1, 2) == bits({0, 1, 2}));
    CHECK(t.cover_set(0) == bits({1, 2}));
    CHECK(t.max_cost() == 5);
    CHECK(!t.unit_costs());
    t.require_feasible();
}

TEST_CASE("link classification") {
    TapInstance t = star();
    CHECK(t.classify_link(0).kind == LinkKind::Cross);
    CHECK(!t.classify_link(0).up);
    CHECK(t.classify_link(3).kind == LinkKind::REdge);
    CHECK(t.classify_link(3).up);

    TapInstance p = path3({{1, 2, 1}, {0, 2, 1}});
    CHECK(p.classify_link(0).kind == LinkKind::In);
    CHECK(p.classify_link(0).up);
    CHECK(p.classify_link(1).kind == LinkKind::REdge);

    TapInstance c = cat();
    auto cl = c.classify_link(1); // link 3-4, lca = 1, neither endpoint the lca
    CHECK(cl.kind == LinkKind::In);
    CHECK(!cl.up);
}

TEST_CASE("coverage mass") {
    TapInstance t = star();
    std::vector<Rat> x{Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(0)};
    CHECK(t.coverage(x, 1) == Rat(1)); // links 12 and 31
    CHECK(t.coverage(x, 2) == Rat(1));
    CHECK(t.covering_links(bits({2})) == std::vector<int>{0, 1, 3});
}

TEST_CASE("post order and subtrees") {
    TapInstance c = cat();
    CHECK(c.post_order() == std::vector<int>{3, 2, 4, 1, 0});
    CHECK(c.subtree_nodes(1) == bits({1, 2, 3, 4}));
    CHECK(c.subtree_leaf_count(1) == 2);
    CHECK(c.subtree_leaf_count(2) == 1);
    CHECK(c.diameter() == 3);
}

TEST_CASE("branch enumeration dedups the whole tree against a lone root child") {
    TapInstance p = path3({{1, 2, 1}, {0, 2, 1}});
    auto b3 = enumerate_branches(p, 3);
    REQUIRE(b3.size() == 2);
    CHECK(b3[0].edges == bits({1, 2}));
    CHECK(b3[0].top == 1);
    CHECK(b3[0].leaf_count == 1);
    CHECK(b3[1].edges == bits({2}));
    CHECK(b3[1].top == 2);
    CHECK(enumerate_branches(p, 1).empty());

    TapInstance s = star();
    auto b2 = enumerate_branches(s, 2);
    REQUIRE(b2.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(b2[i].edges == bits({i + 1}));
        CHECK(b2[i].leaf_count == 1);
    }
    auto b4 = enumerate_branches(s, 4);
    REQUIRE(b4.size() == 4);
    CHECK(b4[3].whole_tree);
    CHECK(b4[3].edges == s.all_edges());
    CHECK(b4[3].leaf_count == 3);
}

TEST_CASE("contraction merges into the topmost node") {
    TapInstance c = cat();
    auto r = contract(c, c.path_nodes(2, 3)); // merge nodes 2 and 3 into 2
    CHECK(r.inst.n() == 4);
    CHECK(r.node_map[3] == r.node_map[2]);
    CHECK(r.src_node[r.node_map[2]] == 2);
    CHECK(r.inst.id_of(r.node_map[2]) == 12);
    // Link 2-3 collapses; 3-4 becomes 2-4; 0-3 becomes 0-2.
    CHECK(r.link_map[0] == -1);
    REQUIRE(r.link_map[1] >= 0);
    const Link& m = r.inst.link(r.link_map[1]);
    CHECK(((m.u == r.node_map[3] && m.v == r.node_map[4]) ||
           (m.u == r.node_map[4] && m.v == r.node_map[3])));
    CHECK(r.src_link[r.link_map[2]] == 2);
    CHECK(r.inst.num_links() == 2);

    // Contracting the whole tree leaves one node and no links.
    auto w = contract(c, c.path_nodes(3, 4) | c.path_nodes(0, 3));
    CHECK(w.inst.n() == 1);
    CHECK(w.inst.num_links() == 0);
    CHECK(w.inst.root() == 0);

    CHECK_THROWS_AS(contract(c, bits({2, 4})), Error); // not connected
}

TEST_CASE("path cover cost picks the cheapest interval cover") {
    TapInstance p = TapInstance::build({0, 1, 2, 3}, 0, {-1, 0, 1, 2},
                                       {{0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {0, 2, 8}, {1, 3, 5}});
    std::vector<int> chosen;
    CHECK(path_cover_cost(p, 0, 3, &chosen) == 7);
    CHECK(chosen == std::vector<int>{0, 4});
    CHECK(path_cover_cost(p, 0, 2) == 5);
    CHECK(path_cover_cost(p, 2, 3) == 4);

    TapInstance q = path3({{0, 1, 1}});
    CHECK_THROWS_AS(path_cover_cost(q, 0, 2), Error);
}

TEST_CASE("shadow completion prices every pair and remembers witnesses") {
    TapInstance p = path3({{1, 2, 3}, {0, 2, 4}});
    auto sc = shadow_complete(p);
    REQUIRE(sc.inst.num_links() == 3);
    int e01 = find_link(sc.inst, 0, 1);
    int e02 = find_link(sc.inst, 0, 2);
    int e12 = find_link(sc.inst, 1, 2);
    CHECK(sc.inst.link(e01).cost == 4);
    CHECK(sc.inst.link(e02).cost == 4);
    CHECK(sc.inst.link(e12).cost == 3);
    CHECK(sc.expansion[e01] == std::vector<int>{1});
    CHECK(sc.expansion[e12] == std::vector<int>{0});
    long long expanded = 0;
    for (int e : sc.expansion[e02]) expanded += p.link(e).cost;
    CHECK(expanded == sc.inst.link(e02).cost);
}

TEST_CASE("unit shadow closure adds exactly the single-link shadows") {
    TapInstance s = TapInstance::build({0, 1, 2, 3}, 0, {-1, 0, 0, 0}, {{1, 2, 1}, {2, 3, 1}});
    auto cl = shadow_close_unit(s);
    CHECK(cl.inst.num_links() == 5);
    CHECK(find_link(cl.inst, 1, 3) == -1); // no single link covers that path
    int e01 = find_link(cl.inst, 0, 1);
    REQUIRE(e01 >= 0);
    CHECK(cl.parent_link[e01] == 0);
    int e03 = find_link(cl.inst, 0, 3);
    REQUIRE(e03 >= 0);
    CHECK(cl.parent_link[e03] == 1);
    CHECK(cl.inst.unit_costs());
}

TEST_CASE("up vector splits non-up links onto their shadows") {
    TapInstance c = cat();
    auto cl = shadow_close_unit(c.unit_costs() ? c : c);
    const TapInstance& t = cl.inst;
    int e34 = find_link(t, 3, 4);
    REQUIRE(e34 >= 0); // in-link, lca 1, not up
    std::vector<Rat> x(t.num_links());
    x[e34] = Rat(1, 2);
    auto y = up_vector(t, x, UpSplit::InOnly);
    CHECK(y[e34].is_zero());
    CHECK(y[find_link(t, 3, 1)] == Rat(1, 2));
    CHECK(y[find_link(t, 4, 1)] == Rat(1, 2));

    // Cross links stay put under InOnly and split to the root otherwise.
    TapInstance s = star();
    auto scl = shadow_close_unit(TapInstance::build({0, 1, 2, 3}, 0, {-1, 0, 0, 0},
                                                    {{1, 2, 1}, {2, 3, 1}, {3, 1, 1}}));
    const TapInstance& st = scl.inst;
    int e12 = find_link(st, 1, 2);
    std::vector<Rat> xs(st.num_links());
    xs[e12] = Rat(1);
    auto y1 = up_vector(st, xs, UpSplit::InOnly);
    CHECK(y1[e12] == Rat(1));
    auto y2 = up_vector(st, xs, UpSplit::AllNonUp);
    CHECK(y2[e12].is_zero());
    CHECK(y2[find_link(st, 0, 1)] == Rat(1));
    CHECK(y2[find_link(st, 0, 2)] == Rat(1));
    (void)s;
}

TEST_CASE("json round trip preserves the instance") {
    TapInstance c = cat();
    std::string text = c.to_json_text();
    TapInstance back = TapInstance::from_json_text(text);
    CHECK(back.n() == c.n());
    CHECK(back.to_json_text() == text);
    CHECK(back.id_of(back.root()) == 10);
    CHECK(back.num_links() == 3);
    CHECK(back.link(1).cost == 1);

    TapInstance parsed = TapInstance::from_json_text(R"({
        "nodes": [5, 7, 9],
        "root": 7,
        "tree_edges": [[5, 7], [9, 5]],
        "links": [{"u": 9, "v": 7, "cost": 3}]
    })");
    CHECK(parsed.n() == 3);
    CHECK(parsed.depth(parsed.index_of(9)) == 2);
    CHECK(parsed.link(0).cost == 3);
    CHECK(parsed.to_dot().find("--") != std::string::npos);
}

TEST_CASE("malformed inputs are rejected") {
    CHECK_THROWS_AS(TapInstance::from_json_text("not json"), Error);
    CHECK_THROWS_AS(TapInstance::from_json_text(R"({"nodes":[0,1],"root":0,"tree_edges":[]})"),
                    Error);
    CHECK_THROWS_AS(TapInstance::from_json_text(
                        R"({"nodes":[0,1],"root":0,"tree_edges":[[1,0]],"links":[{"u":1,"v":1}]})"),
                    Error);
    CHECK_THROWS_AS(TapInstance::build({0, 0}, 0, {-1, 0}, {}), Error);
    CHECK_THROWS_AS(TapInstance::build({0, 1, 2}, 0, {-1, 2, 1}, {}), Error);
    CHECK_THROWS_AS(TapInstance::build({0, 1}, 0, {-1, 1}, {}), Error);
    CHECK_THROWS_AS(TapInstance::build({0, 1}, 0, {-1, 0}, {{0, 1, 0}}), Error);

    std::vector<long long> ids(65);
    std::vector<int> par(65, 0);
    for (int i = 0; i < 65; ++i) ids[i] = i;
    par[0] = -1;
    bool cap = false;
    try {
        TapInstance::build(std::move(ids), 0, std::move(par), {});
    } catch (const Error& e) {
        cap = (e.kind() == ErrorKind::CapExceeded);
    }
    CHECK(cap);

    TapInstance bare = path3({{1, 2, 1}});
    CHECK_THROWS_AS(bare.require_feasible(), Error);
}
