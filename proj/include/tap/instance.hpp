#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tap/error.hpp"
#include "tap/rational.hpp"

namespace tap {

// Tree edges are identified by their child node index (the root has no edge), so
// edge sets fit in one machine word.  Everything downstream relies on this.
using EdgeSet = std::uint64_t;

constexpr int kMaxNodes = 64; // hard limit from the EdgeSet representation

struct Link {
    int u = 0;          // node index
    int v = 0;          // node index
    long long cost = 1; // positive integer
};

// Classification of a link relative to the root r:
//   In    : r not on the tree path of the link
//   Cross : r strictly interior to the tree path
//   REdge : one endpoint is r
// Independently, a link is an "up" link when one endpoint is an ancestor of the
// other (REdge links are always up; Cross links never are).
enum class LinkKind { In, Cross, REdge };

struct LinkClass {
    LinkKind kind = LinkKind::In;
    bool up = false;
};

// A rooted tree plus candidate links.  Node ids from input files are arbitrary
// integers; internally nodes are dense indices 0..n-1 with `ids` giving the
// external name.  Instances are immutable once built.
class TapInstance {
  public:
    TapInstance() = default;

    // parent[i] = node index of the parent, -1 exactly for the root.
    static TapInstance build(std::vector<long long> ids, int root, std::vector<int> parent,
                             std::vector<Link> links);

    int n() const { return n_; }
    int root() const { return root_; }
    long long id_of(int v) const { return ids_[v]; }
    int index_of(long long external_id) const; // Malformed if absent
    int parent(int v) const { return parent_[v]; }
    int depth(int v) const { return depth_[v]; }
    const std::vector<int>& children(int v) const { return children_[v]; }
    bool is_leaf(int v) const { return v != root_ && children_[v].empty(); }
    std::vector<int> leaves() const;
    int leaf_count() const;
    bool is_ancestor(int a, int v) const; // a == v counts
    int lca(int u, int v) const;

    const std::vector<Link>& links() const { return links_; }
    const Link& link(int e) const { return links_[e]; }
    int num_links() const { return static_cast<int>(links_.size()); }
    long long max_cost() const;
    bool unit_costs() const;

    // All tree edges (bit per non-root node).
    EdgeSet all_edges() const { return all_edges_; }
    int num_edges() const { return n_ - 1; }
    // Tree path between two nodes, as an edge set.
    EdgeSet path_edges(int u, int v) const;
    // Nodes on the tree path between two nodes (inclusive), as a node set.
    EdgeSet path_nodes(int u, int v) const;
    // Edges covered by link e (== path_edges of its endpoints).
    EdgeSet cover_set(int e) const { return cover_[e]; }
    // Links covering at least one edge of `edges` (ascending link ids).
    std::vector<int> covering_links(EdgeSet edges) const;
    // x-mass over the links covering edge f (f = child node index).
    Rat coverage(const std::vector<Rat>& x, int f) const;

    LinkClass classify_link(int e) const;

    // Complete rooted subtree at v, as a node set (bit per node; includes v).
    EdgeSet subtree_nodes(int v) const { return subtree_[v]; }
    // Number of tree leaves inside the complete subtree at v.
    int subtree_leaf_count(int v) const;
    // Tree diameter in edges (0 for a single node).
    int diameter() const;
    // Nodes in post order, children visited in ascending index order.
    const std::vector<int>& post_order() const { return post_; }

    // Every tree edge must be covered by some link; Infeasible otherwise.
    void require_feasible() const;

    // Serialization.
    static TapInstance from_json_text(const std::string& text);
    static TapInstance from_file(const std::string& path);
    std::string to_json_text() const;
    std::string to_dot() const; // tree edges bold, links dashed

  private:
    int n_ = 0;
    int root_ = 0;
    std::vector<long long> ids_;
    std::vector<int> parent_;
    std::vector<int> depth_;
    std::vector<std::vector<int>> children_;
    std::vector<Link> links_;
    std::vector<EdgeSet> cover_;   // per link
    std::vector<EdgeSet> subtree_; // per node, complete rooted subtree node set
    std::vector<int> post_;
    EdgeSet all_edges_ = 0;
};

// Result of contracting a connected node set into a single node.  The merged
// node keeps the index slot (and external id) of the topmost contracted node.
// Links mapped endpoint-wise; links that become loops are dropped.
struct ContractionResult {
    TapInstance inst;
    std::vector<int> node_map; // old node index -> new node index
    std::vector<int> link_map; // old link id -> new link id, -1 if dropped
    std::vector<int> src_link; // new link id -> old link id
    std::vector<int> src_node; // new node index -> old node index (topmost representative)
};

ContractionResult contract(const TapInstance& inst, EdgeSet node_set);

// Branch: edge set of a complete rooted subtree plus its parent tree edge, or
// the whole tree rooted at r.  `top` is the child node whose subtree it is
// (or the root for the whole-tree branch).
struct Branch {
    EdgeSet edges = 0;
    int leaf_count = 0;
    int top = 0;
    bool whole_tree = false;
};

// All branches with leaf_count < k, deduplicated by edge set, ordered by
// ascending `top` with the whole-tree branch last.  `cap` guards the count.
std::vector<Branch> enumerate_branches(const TapInstance& inst, int k, long long cap = 100000);

// Minimum cost of covering every edge on the tree path between u and v.
// Interval DP over the path; Infeasible if some path edge has no cover.
long long path_cover_cost(const TapInstance& inst, int u, int v,
                          std::vector<int>* chosen_links = nullptr);

// Metric completion: the link set becomes all node pairs u<v, priced at the
// cheapest cover of the uv tree path.  `expansion[e]` lists original link ids
// realizing that price, so completed solutions expand to equal-cost originals.
struct ShadowCompletion {
    TapInstance inst;
    std::vector<std::vector<int>> expansion; // completed link -> original link ids
};
ShadowCompletion shadow_complete(const TapInstance& inst);

// Unit-cost shadow closure: all pairs whose tree path is covered by a single
// original link, at cost 1.  `parent_link[e]` is one witnessing original link.
struct ShadowClosure {
    TapInstance inst;
    std::vector<int> parent_link; // closed link -> original link id
};
ShadowClosure shadow_close_unit(const TapInstance& inst);

// Which links get split by up_vector.
enum class UpSplit {
    InOnly,   // split non-up In links into (u,lca),(v,lca); Cross/REdge untouched
    AllNonUp, // split every non-up link (Cross included, lca = r)
};

// Move the mass of each split link onto its two up shadows.  The instance must
// contain the shadow pairs (use a completed/closed instance).  Returns the new
// mass vector over the same link ids.
std::vector<Rat> up_vector(const TapInstance& inst, const std::vector<Rat>& x, UpSplit mode);

// Lookup of the link id for an unordered node pair; -1 if absent (first match
// by ascending id when parallels exist).
int find_link(const TapInstance& inst, int u, int v);

} // namespace tap
