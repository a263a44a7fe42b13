#include "tap/gen.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "tap/error.hpp"

namespace tap {

namespace {

// Engine draws are used modulo the range: the tiny bias is irrelevant for test
// instances and the result depends only on the (fully specified) mt19937_64
// stream, so identical seeds give identical instances on every platform.
int uniform(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

long long draw_cost(std::mt19937_64& rng, long long max_cost) {
    if (max_cost <= 1) return 1;
    return 1 + static_cast<long long>(rng() % static_cast<std::uint64_t>(max_cost));
}

bool add_pair(std::set<std::pair<int, int>>& seen, std::vector<Link>& links, int u, int v,
              long long cost) {
    if (u == v) return false;
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) return false;
    links.push_back({u, v, cost});
    return true;
}

std::vector<int> random_tree_parents(std::mt19937_64& rng, int n) {
    std::vector<int> parent(n, -1);
    for (int v = 1; v < n; ++v) parent[v] = uniform(rng, 0, v - 1);
    return parent;
}

std::vector<int> caterpillar_parents(std::mt19937_64& rng, int n) {
    std::vector<int> parent(n, -1);
    int spine = std::max(2, n / 2);
    for (int v = 1; v < spine; ++v) parent[v] = v - 1;
    for (int v = spine; v < n; ++v) parent[v] = uniform(rng, 0, spine - 1);
    return parent;
}

std::vector<int> bounded_diameter_parents(std::mt19937_64& rng, int n, int d) {
    check(d >= 1, "bounded-diameter profile needs diameter >= 1", ErrorKind::Malformed);
    std::vector<int> parent(n, -1);
    if (d == 1) { // only the single-edge tree has diameter 1
        check(n == 2, "diameter 1 forces n = 2", ErrorKind::Malformed);
        parent[1] = 0;
        return parent;
    }
    // Even d: every node within d/2 of the root.  Odd d: two adjacent centers
    // 0 and 1; every node within (d-1)/2 of its own center.
    int radius = (d % 2 == 0) ? d / 2 : (d - 1) / 2;
    std::vector<int> center_depth(n, 0);
    int first = 1;
    if (d % 2 == 1 && n >= 2) {
        parent[1] = 0;
        first = 2;
    }
    std::vector<int> eligible; // nodes with center_depth < radius
    for (int v = 0; v < first; ++v) eligible.push_back(v);
    for (int v = first; v < n; ++v) {
        int p = eligible[uniform(rng, 0, static_cast<int>(eligible.size()) - 1)];
        parent[v] = p;
        center_depth[v] = center_depth[p] + 1;
        if (center_depth[v] < radius) eligible.push_back(v);
    }
    return parent;
}

std::vector<Link> random_pair_links(std::mt19937_64& rng, int n, int draws, long long max_cost) {
    std::vector<Link> links;
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < draws; ++i) {
        int u = uniform(rng, 0, n - 1);
        int v = uniform(rng, 0, n - 1);
        add_pair(seen, links, u, v, draw_cost(rng, max_cost));
    }
    return links;
}

// Links for the spider profile: up links (node to one of its ancestors) and
// cross links (lca is the root), never a non-up in link.
std::vector<Link> spider_links(std::mt19937_64& rng, const std::vector<int>& parent, int n,
                               int draws, long long max_cost) {
    std::vector<Link> links;
    std::set<std::pair<int, int>> seen;
    std::vector<int> top(n, 0); // root child whose subtree holds the node
    for (int v = 1; v < n; ++v) top[v] = parent[v] == 0 ? v : top[parent[v]];
    for (int i = 0; i < draws; ++i) {
        bool want_cross = rng() & 1;
        if (want_cross) {
            int u = uniform(rng, 1, n - 1);
            int v = uniform(rng, 1, n - 1);
            if (top[u] != top[v]) {
                add_pair(seen, links, u, v, draw_cost(rng, max_cost));
                continue;
            }
        }
        int v = uniform(rng, 1, n - 1);
        int steps = uniform(rng, 1, 3);
        int a = v;
        while (steps-- > 0 && a != 0) a = parent[a];
        add_pair(seen, links, v, a, draw_cost(rng, max_cost));
    }
    return links;
}

} // namespace

Profile profile_from_name(const std::string& name) {
    if (name == "random-tree") return Profile::RandomTree;
    if (name == "star") return Profile::Star;
    if (name == "caterpillar") return Profile::Caterpillar;
    if (name == "spider") return Profile::Spider;
    if (name == "bounded-diameter") return Profile::BoundedDiameter;
    fail(ErrorKind::Malformed, "unknown profile '" + name + "'");
}

std::string profile_name(Profile profile) {
    switch (profile) {
        case Profile::RandomTree: return "random-tree";
        case Profile::Star: return "star";
        case Profile::Caterpillar: return "caterpillar";
        case Profile::Spider: return "spider";
        case Profile::BoundedDiameter: return "bounded-diameter";
    }
    fail(ErrorKind::Internal, "unhandled profile");
}

TapInstance generate(std::uint64_t seed, const GenOptions& opts) {
    const int n = opts.n;
    check(n >= 2 && n <= kMaxNodes, "instance size must be between 2 and 64", ErrorKind::Malformed);
    check(opts.max_cost >= 1, "max cost must be positive", ErrorKind::Malformed);
    std::mt19937_64 rng(seed);
    const int draws = opts.num_links >= 0 ? opts.num_links : 2 * n;

    std::vector<int> parent;
    std::vector<Link> links;
    switch (opts.profile) {
        case Profile::RandomTree:
            parent = random_tree_parents(rng, n);
            links = random_pair_links(rng, n, draws, opts.max_cost);
            break;
        case Profile::Star: {
            parent.assign(n, 0);
            parent[0] = -1;
            for (int u = 1; u < n; ++u)
                for (int v = u + 1; v < n; ++v) links.push_back({u, v, draw_cost(rng, opts.max_cost)});
            break;
        }
        case Profile::Caterpillar:
            parent = caterpillar_parents(rng, n);
            links = random_pair_links(rng, n, draws, opts.max_cost);
            break;
        case Profile::Spider:
            parent = random_tree_parents(rng, n);
            links = spider_links(rng, parent, n, draws, opts.max_cost);
            break;
        case Profile::BoundedDiameter:
            parent = bounded_diameter_parents(rng, n, opts.diameter);
            links = random_pair_links(rng, n, draws, opts.max_cost);
            break;
    }

    std::vector<long long> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    TapInstance draft = TapInstance::build(ids, 0, parent, links);
    EdgeSet covered = 0;
    for (int e = 0; e < draft.num_links(); ++e) covered |= draft.cover_set(e);
    for (int v = 1; v < n; ++v)
        if (!(covered >> v & 1)) links.push_back({v, 0, draw_cost(rng, opts.max_cost)});
    return TapInstance::build(std::move(ids), 0, std::move(parent), std::move(links));
}

} // namespace tap
