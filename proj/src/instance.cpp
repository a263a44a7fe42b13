#include "tap/instance.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace tap {

namespace {

EdgeSet bit(int i) { return EdgeSet{1} << i; }

} // namespace

TapInstance TapInstance::build(std::vector<long long> ids, int root, std::vector<int> parent,
                               std::vector<Link> links) {
    TapInstance t;
    t.n_ = static_cast<int>(ids.size());
    check(t.n_ >= 1, "instance needs at least one node", ErrorKind::Malformed);
    check(t.n_ <= kMaxNodes, "instance exceeds the 64-node cap", ErrorKind::CapExceeded);
    check(static_cast<int>(parent.size()) == t.n_, "parent array size mismatch",
          ErrorKind::Malformed);
    check(root >= 0 && root < t.n_ && parent[root] == -1, "root must be the unique parentless node",
          ErrorKind::Malformed);
    for (int v = 0; v < t.n_; ++v) {
        if (v == root) continue;
        check(parent[v] >= 0 && parent[v] < t.n_, "parent index out of range",
              ErrorKind::Malformed);
    }
    {
        std::map<long long, int> seen;
        for (int v = 0; v < t.n_; ++v)
            check(seen.emplace(ids[v], v).second, "duplicate node id", ErrorKind::Malformed);
    }

    t.root_ = root;
    t.ids_ = std::move(ids);
    t.parent_ = std::move(parent);

    // Depths; a node left unresolved after n rounds sits on a parent cycle.
    t.depth_.assign(t.n_, -1);
    t.depth_[root] = 0;
    for (int round = 0; round < t.n_; ++round) {
        bool progress = false;
        for (int v = 0; v < t.n_; ++v) {
            if (t.depth_[v] >= 0 || t.depth_[t.parent_[v]] < 0) continue;
            t.depth_[v] = t.depth_[t.parent_[v]] + 1;
            progress = true;
        }
        if (!progress) break;
    }
    for (int v = 0; v < t.n_; ++v)
        check(t.depth_[v] >= 0, "parent pointers do not form a tree", ErrorKind::Malformed);

    t.children_.assign(t.n_, {});
    for (int v = 0; v < t.n_; ++v)
        if (v != root) t.children_[t.parent_[v]].push_back(v);

    // Post order, children in ascending index order (already sorted above).
    t.post_.reserve(t.n_);
    std::vector<std::pair<int, size_t>> stack{{root, 0}};
    while (!stack.empty()) {
        auto& [v, next] = stack.back();
        if (next < t.children_[v].size()) {
            int c = t.children_[v][next++];
            stack.push_back({c, 0});
        } else {
            t.post_.push_back(v);
            stack.pop_back();
        }
    }

    t.subtree_.assign(t.n_, 0);
    for (int v : t.post_) {
        t.subtree_[v] = bit(v);
        for (int c : t.children_[v]) t.subtree_[v] |= t.subtree_[c];
    }

    for (int v = 0; v < t.n_; ++v)
        if (v != root) t.all_edges_ |= bit(v);

    t.links_ = std::move(links);
    t.cover_.reserve(t.links_.size());
    for (const Link& e : t.links_) {
        check(e.u >= 0 && e.u < t.n_ && e.v >= 0 && e.v < t.n_, "link endpoint out of range",
              ErrorKind::Malformed);
        check(e.u != e.v, "link may not be a self-loop", ErrorKind::Malformed);
        check(e.cost >= 1, "link costs must be positive integers", ErrorKind::Malformed);
        t.cover_.push_back(t.path_edges(e.u, e.v));
    }
    return t;
}

int TapInstance::index_of(long long external_id) const {
    for (int v = 0; v < n_; ++v)
        if (ids_[v] == external_id) return v;
    fail(ErrorKind::Malformed, "unknown node id " + std::to_string(external_id));
}

std::vector<int> TapInstance::leaves() const {
    std::vector<int> out;
    for (int v = 0; v < n_; ++v)
        if (is_leaf(v)) out.push_back(v);
    return out;
}

int TapInstance::leaf_count() const {
    int c = 0;
    for (int v = 0; v < n_; ++v)
        if (is_leaf(v)) ++c;
    return c;
}

bool TapInstance::is_ancestor(int a, int v) const {
    return (subtree_[a] & bit(v)) != 0;
}

int TapInstance::lca(int u, int v) const {
    while (u != v) {
        if (depth_[u] < depth_[v])
            v = parent_[v];
        else
            u = parent_[u];
    }
    return u;
}

EdgeSet TapInstance::path_edges(int u, int v) const {
    EdgeSet s = 0;
    while (u != v) {
        if (depth_[u] < depth_[v]) {
            s |= bit(v);
            v = parent_[v];
        } else {
            s |= bit(u);
            u = parent_[u];
        }
    }
    return s;
}

EdgeSet TapInstance::path_nodes(int u, int v) const {
    EdgeSet s = bit(u) | bit(v);
    while (u != v) {
        if (depth_[u] < depth_[v])
            v = parent_[v];
        else
            u = parent_[u];
        s |= bit(u) | bit(v);
    }
    return s;
}

std::vector<int> TapInstance::covering_links(EdgeSet edges) const {
    std::vector<int> out;
    for (int e = 0; e < num_links(); ++e)
        if (cover_[e] & edges) out.push_back(e);
    return out;
}

Rat TapInstance::coverage(const std::vector<Rat>& x, int f) const {
    check(static_cast<int>(x.size()) == num_links(), "mass vector size mismatch");
    Rat s;
    for (int e = 0; e < num_links(); ++e)
        if (cover_[e] & bit(f)) s += x[e];
    return s;
}

LinkClass TapInstance::classify_link(int e) const {
    const Link& lk = links_[e];
    LinkClass c;
    if (lk.u == root_ || lk.v == root_) {
        c.kind = LinkKind::REdge;
        c.up = true;
        return c;
    }
    int l = lca(lk.u, lk.v);
    if (l == root_) {
        c.kind = LinkKind::Cross;
        c.up = false;
    } else {
        c.kind = LinkKind::In;
        c.up = (l == lk.u || l == lk.v);
    }
    return c;
}

int TapInstance::subtree_leaf_count(int v) const {
    int c = 0;
    EdgeSet s = subtree_[v];
    for (int w = 0; w < n_; ++w)
        if ((s & bit(w)) && is_leaf(w)) ++c;
    return c;
}

int TapInstance::diameter() const {
    int best = 0;
    for (int u = 0; u < n_; ++u)
        for (int v = u + 1; v < n_; ++v) {
            int d = depth_[u] + depth_[v] - 2 * depth_[lca(u, v)];
            best = std::max(best, d);
        }
    return best;
}

long long TapInstance::max_cost() const {
    long long m = 0;
    for (const Link& e : links_) m = std::max(m, e.cost);
    return m;
}

bool TapInstance::unit_costs() const {
    for (const Link& e : links_)
        if (e.cost != 1) return false;
    return true;
}

void TapInstance::require_feasible() const {
    EdgeSet covered = 0;
    for (const EdgeSet& c : cover_) covered |= c;
    if (covered != all_edges_)
        fail(ErrorKind::Infeasible, "some tree edge is covered by no link");
}

TapInstance TapInstance::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        fail(ErrorKind::Malformed, std::string("bad JSON: ") + ex.what());
    }
    try {
        std::vector<long long> ids = j.at("nodes").get<std::vector<long long>>();
        long long root_id = j.at("root").get<long long>();
        std::map<long long, int> index;
        for (size_t i = 0; i < ids.size(); ++i) {
            check(index.emplace(ids[i], static_cast<int>(i)).second, "duplicate node id",
                  ErrorKind::Malformed);
        }
        auto lookup = [&](long long id) {
            auto it = index.find(id);
            check(it != index.end(), "unknown node id " + std::to_string(id),
                  ErrorKind::Malformed);
            return it->second;
        };
        std::vector<int> parent(ids.size(), -2);
        int root = lookup(root_id);
        parent[root] = -1;
        for (const auto& te : j.at("tree_edges")) {
            check(te.is_array() && te.size() == 2, "tree edge must be a [child, parent] pair",
                  ErrorKind::Malformed);
            int c = lookup(te[0].get<long long>());
            int p = lookup(te[1].get<long long>());
            check(c != root, "root may not appear as a tree-edge child", ErrorKind::Malformed);
            check(parent[c] == -2, "node has two parents", ErrorKind::Malformed);
            parent[c] = p;
        }
        for (size_t v = 0; v < ids.size(); ++v)
            check(parent[v] != -2, "node " + std::to_string(ids[v]) + " missing a tree edge",
                  ErrorKind::Malformed);
        std::vector<Link> links;
        if (j.contains("links")) {
            for (const auto& le : j.at("links")) {
                Link lk;
                lk.u = lookup(le.at("u").get<long long>());
                lk.v = lookup(le.at("v").get<long long>());
                lk.cost = le.value("cost", 1LL);
                links.push_back(lk);
            }
        }
        return build(std::move(ids), root, std::move(parent), std::move(links));
    } catch (const nlohmann::json::exception& ex) {
        fail(ErrorKind::Malformed, std::string("bad instance JSON: ") + ex.what());
    }
}

TapInstance TapInstance::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Malformed, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string TapInstance::to_json_text() const {
    nlohmann::json j;
    j["nodes"] = ids_;
    j["root"] = ids_[root_];
    auto te = nlohmann::json::array();
    for (int v = 0; v < n_; ++v)
        if (v != root_) te.push_back({ids_[v], ids_[parent_[v]]});
    j["tree_edges"] = te;
    auto ls = nlohmann::json::array();
    for (const Link& e : links_)
        ls.push_back({{"u", ids_[e.u]}, {"v", ids_[e.v]}, {"cost", e.cost}});
    j["links"] = ls;
    return j.dump(2);
}

std::string TapInstance::to_dot() const {
    std::ostringstream os;
    os << "graph tap {\n";
    os << "  node [shape=circle];\n";
    os << "  " << ids_[root_] << " [shape=doublecircle];\n";
    for (int v = 0; v < n_; ++v)
        if (v != root_)
            os << "  " << ids_[parent_[v]] << " -- " << ids_[v] << " [penwidth=2];\n";
    for (const Link& e : links_)
        os << "  " << ids_[e.u] << " -- " << ids_[e.v] << " [style=dashed, label=\"" << e.cost
           << "\"];\n";
    os << "}\n";
    return os.str();
}

ContractionResult contract(const TapInstance& inst, EdgeSet node_set) {
    check(node_set != 0, "empty contraction set");
    check((node_set >> inst.n()) == 0, "contraction set references unknown nodes");

    // The merged node keeps the slot of the topmost member; connectivity means
    // every other member's parent is also a member.
    int top = -1;
    for (int v = 0; v < inst.n(); ++v) {
        if (!(node_set & (EdgeSet{1} << v))) continue;
        if (top == -1 || inst.depth(v) < inst.depth(top)) top = v;
    }
    for (int v = 0; v < inst.n(); ++v) {
        if (!(node_set & (EdgeSet{1} << v)) || v == top) continue;
        check((node_set & (EdgeSet{1} << inst.parent(v))) != 0,
              "contraction set is not connected in the tree");
    }

    ContractionResult r;
    r.node_map.assign(inst.n(), -1);
    for (int v = 0; v < inst.n(); ++v) {
        bool in_set = (node_set & (EdgeSet{1} << v)) != 0;
        if (in_set && v != top) continue;
        r.node_map[v] = static_cast<int>(r.src_node.size());
        r.src_node.push_back(v);
    }
    for (int v = 0; v < inst.n(); ++v)
        if (r.node_map[v] == -1) r.node_map[v] = r.node_map[top];

    std::vector<long long> ids;
    std::vector<int> parent(r.src_node.size(), -1);
    for (size_t i = 0; i < r.src_node.size(); ++i) {
        int old = r.src_node[i];
        ids.push_back(inst.id_of(old));
        if (old == inst.root()) continue;
        int p = inst.parent(old);
        // For the merged node `top`, p lies outside the set by minimality.
        parent[i] = r.node_map[p];
    }

    std::vector<Link> links;
    r.link_map.assign(inst.num_links(), -1);
    for (int e = 0; e < inst.num_links(); ++e) {
        const Link& lk = inst.link(e);
        int nu = r.node_map[lk.u];
        int nv = r.node_map[lk.v];
        if (nu == nv) continue;
        r.link_map[e] = static_cast<int>(links.size());
        r.src_link.push_back(e);
        links.push_back(Link{nu, nv, lk.cost});
    }

    int new_root = r.node_map[inst.root()];
    r.inst = TapInstance::build(std::move(ids), new_root, std::move(parent), std::move(links));
    return r;
}

std::vector<Branch> enumerate_branches(const TapInstance& inst, int k, long long cap) {
    check(k >= 1, "branch bound k must be positive", ErrorKind::Malformed);
    std::vector<Branch> out;
    std::vector<EdgeSet> seen;
    auto push = [&](Branch b) {
        for (EdgeSet s : seen)
            if (s == b.edges) return;
        seen.push_back(b.edges);
        out.push_back(b);
        check(static_cast<long long>(out.size()) <= cap, "branch enumeration exceeds cap",
              ErrorKind::CapExceeded);
    };
    for (int v = 0; v < inst.n(); ++v) {
        if (v == inst.root()) continue;
        int lc = inst.subtree_leaf_count(v);
        if (lc >= k) continue;
        // Subtree edges plus the parent edge of v == one bit per subtree node.
        push(Branch{inst.subtree_nodes(v), lc, v, false});
    }
    if (inst.n() >= 2 && inst.leaf_count() < k)
        push(Branch{inst.all_edges(), inst.leaf_count(), inst.root(), true});
    return out;
}

long long path_cover_cost(const TapInstance& inst, int u, int v, std::vector<int>* chosen_links) {
    check(u != v, "path cover needs distinct endpoints");
    // Path edges in order u -> lca -> v.
    int l = inst.lca(u, v);
    std::vector<int> edges; // child-node indices, ordered along the path
    for (int w = u; w != l; w = inst.parent(w)) edges.push_back(w);
    {
        std::vector<int> down;
        for (int w = v; w != l; w = inst.parent(w)) down.push_back(w);
        edges.insert(edges.end(), down.rbegin(), down.rend());
    }
    int m = static_cast<int>(edges.size());
    std::vector<int> pos(inst.n(), -1);
    for (int i = 0; i < m; ++i) pos[edges[i]] = i;

    constexpr long long inf = std::numeric_limits<long long>::max() / 4;
    // f[i] = cheapest cover of the first i path edges; a link's intersection
    // with the path is contiguous, so this is plain interval covering.
    std::vector<long long> f(m + 1, inf);
    std::vector<std::pair<int, int>> how(m + 1, {-1, -1}); // {link, previous i}
    f[0] = 0;
    struct Interval {
        int lo, hi, link;
        long long cost;
    };
    std::vector<Interval> ivs;
    for (int e = 0; e < inst.num_links(); ++e) {
        EdgeSet c = inst.cover_set(e);
        int lo = m, hi = -1;
        for (int i = 0; i < m; ++i) {
            if (c & (EdgeSet{1} << edges[i])) {
                lo = std::min(lo, i);
                hi = std::max(hi, i);
            }
        }
        if (hi < 0) continue;
        ivs.push_back({lo, hi, e, inst.link(e).cost});
    }
    for (int i = 1; i <= m; ++i) {
        for (const Interval& iv : ivs) {
            if (iv.hi < i - 1 || iv.lo > i - 1) continue;
            if (f[iv.lo] == inf) continue;
            long long cand = f[iv.lo] + iv.cost;
            if (cand < f[iv.hi + 1]) {
                f[iv.hi + 1] = cand;
                how[iv.hi + 1] = {iv.link, iv.lo};
            }
            if (cand < f[i]) {
                f[i] = cand;
                how[i] = {iv.link, iv.lo};
            }
        }
    }
    if (f[m] >= inf) fail(ErrorKind::Infeasible, "tree path has an uncoverable edge");
    if (chosen_links) {
        chosen_links->clear();
        for (int i = m; i > 0;) {
            auto [e, prev] = how[i];
            chosen_links->push_back(e);
            i = prev;
        }
        std::sort(chosen_links->begin(), chosen_links->end());
        chosen_links->erase(std::unique(chosen_links->begin(), chosen_links->end()),
                            chosen_links->end());
    }
    return f[m];
}

ShadowCompletion shadow_complete(const TapInstance& inst) {
    ShadowCompletion out;
    std::vector<Link> links;
    for (int u = 0; u < inst.n(); ++u) {
        for (int v = u + 1; v < inst.n(); ++v) {
            std::vector<int> chosen;
            long long c = path_cover_cost(inst, u, v, &chosen);
            links.push_back(Link{u, v, c});
            out.expansion.push_back(std::move(chosen));
        }
    }
    std::vector<long long> ids;
    std::vector<int> parent;
    for (int v = 0; v < inst.n(); ++v) {
        ids.push_back(inst.id_of(v));
        parent.push_back(v == inst.root() ? -1 : inst.parent(v));
    }
    out.inst = TapInstance::build(std::move(ids), inst.root(), std::move(parent), std::move(links));
    return out;
}

ShadowClosure shadow_close_unit(const TapInstance& inst) {
    check(inst.unit_costs(), "shadow closure applies to unit costs only", ErrorKind::Malformed);
    ShadowClosure out;
    std::vector<Link> links;
    for (int u = 0; u < inst.n(); ++u) {
        for (int v = u + 1; v < inst.n(); ++v) {
            EdgeSet path = inst.path_edges(u, v);
            int witness = -1;
            for (int e = 0; e < inst.num_links(); ++e) {
                if ((inst.cover_set(e) & path) == path) {
                    witness = e;
                    break;
                }
            }
            if (witness < 0) continue;
            links.push_back(Link{u, v, 1});
            out.parent_link.push_back(witness);
        }
    }
    std::vector<long long> ids;
    std::vector<int> parent;
    for (int v = 0; v < inst.n(); ++v) {
        ids.push_back(inst.id_of(v));
        parent.push_back(v == inst.root() ? -1 : inst.parent(v));
    }
    out.inst = TapInstance::build(std::move(ids), inst.root(), std::move(parent), std::move(links));
    return out;
}

int find_link(const TapInstance& inst, int u, int v) {
    for (int e = 0; e < inst.num_links(); ++e) {
        const Link& lk = inst.link(e);
        if ((lk.u == u && lk.v == v) || (lk.u == v && lk.v == u)) return e;
    }
    return -1;
}

std::vector<Rat> up_vector(const TapInstance& inst, const std::vector<Rat>& x, UpSplit mode) {
    check(static_cast<int>(x.size()) == inst.num_links(), "mass vector size mismatch");
    std::vector<Rat> y(x.size());
    for (int e = 0; e < inst.num_links(); ++e) {
        if (x[e].is_zero()) continue;
        LinkClass c = inst.classify_link(e);
        bool split = !c.up && (mode == UpSplit::AllNonUp || c.kind == LinkKind::In);
        if (!split) {
            y[e] += x[e];
            continue;
        }
        const Link& lk = inst.link(e);
        int l = inst.lca(lk.u, lk.v);
        for (int end : {lk.u, lk.v}) {
            int s = find_link(inst, end, l);
            check(s >= 0, "missing up shadow; instance is not shadow-complete");
            y[s] += x[e];
        }
    }
    return y;
}

} // namespace tap
