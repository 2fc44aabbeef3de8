#ifndef WHITEHEAD_TREE_HPP
#define WHITEHEAD_TREE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "whitehead/errors.hpp"
#include "whitehead/rng.hpp"

namespace whitehead {

class Rng;

/// Handle for one edge of a labeled tree. Edges are identified with their
/// child-side node; the top node stands for the root edge e*. A ref is bound
/// to the tree version it was taken from and goes stale on any mutation.
struct EdgeRef {
    int node = -1;
    std::uint64_t version = 0;
};

/// A Whitehead step expressed on stable node ids: collapse the (interior)
/// edge above `edge_node` and reopen so that `pull_node` (a child of
/// `edge_node`) moves up beside it, while the former sibling regroups with
/// the other child. This is the internal engine form; the textual form uses
/// edge addresses and direction 1/2 in canonical child order.
struct NodeStep {
    int edge_node = -1;
    int pull_node = -1;
};

/// Rooted binary tree with n+1 leaves labeled 0..n and a distinguished root
/// edge. Children are unordered; canonical presentation puts the child with
/// the smaller minimum label first. Nodes live in an arena and keep their
/// ids across Whitehead steps, which only rewire parent/child links.
class LabeledTree {
public:
    LabeledTree() = default;

    /// The n=0 tree: a single leaf labeled 0.
    static LabeledTree single_leaf();

    /// Parse the textual form `tree := label | "(" tree "," tree ")"`.
    /// Throws ParseError on bad syntax or a non-permutation label set.
    static LabeledTree parse(std::string_view text);

    /// Canonical serialization; equal trees produce identical text.
    std::string canonical() const;

    int complexity() const { return n_; }        // n: number of leaves - 1
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int top() const { return top_; }
    std::uint64_t version() const { return version_; }

    bool is_leaf(int node) const { return nodes_[node].child[0] < 0; }
    bool is_internal(int node) const { return !is_leaf(node); }
    int label(int node) const { return nodes_[node].label; }
    int parent(int node) const { return nodes_[node].parent; }
    int min_label(int node) const { return nodes_[node].minlab; }

    /// Number of ends (leaves) of the subtree below `node`; maintained
    /// incrementally across steps.
    int ends(int node) const { return nodes_[node].ends; }

    /// Children in canonical order (smaller minimum label first).
    std::pair<int, int> children(int node) const;

    int sibling(int node) const;

    EdgeRef root_edge() const { return {top_, version_}; }
    EdgeRef edge(int node) const { return {node, version_}; }

    /// Checks the ref was taken from this version; throws StaleEdgeError.
    void check_ref(const EdgeRef& e) const;

    /// Interior edge: child-side node is internal and not the top node.
    bool is_interior(int node) const { return is_internal(node) && node != top_; }

    /// Edge address over {a,b}: canonical child choices walking down from
    /// the top node; the empty string is the root edge.
    std::string address_of(int node) const;
    int resolve_address(std::string_view addr) const;  // throws ParseError

    /// The core rewriting primitive. `pull_node` must be a child of the
    /// interior edge `edge_node`. Mutates in place, bumps the version, and
    /// returns the step that undoes this one.
    NodeStep apply_pull(int edge_node, int pull_node);

    /// Structure checks: label permutation, node/edge counts, end counts.
    /// Throws InvariantError if anything is off.
    void validate() const;

    /// Height of every edge (root edge = 1), indexed by node id.
    std::vector<int> heights() const;
    int height() const;

    /// Nodes in an order where children precede parents.
    std::vector<int> postorder() const;

    bool operator==(const LabeledTree& other) const { return canonical() == other.canonical(); }

private:
    struct Node {
        int parent = -1;
        int child[2] = {-1, -1};
        int label = -1;
        int ends = 1;
        int minlab = -1;
    };

    int add_leaf(int lab);
    int add_internal();
    void replace_child(int par, int oldc, int newc);

    friend LabeledTree caterpillar_tree(int n);
    friend void enumerate_trees(int n, const std::function<void(const LabeledTree&)>& fn);
    friend LabeledTree random_tree(int n, Rng& rng);

    /// Used by tree builders: insert a fresh leaf `lab` by subdividing the
    /// edge above `at_node`. Returns the id of the new internal node.
    int insert_leaf_at_edge(int at_node, int lab);
    /// Undo of insert_leaf_at_edge; `saved_minlabs` are restored up the path.
    void remove_last_insertion(int internal_node, const std::vector<std::pair<int, int>>& saved_minlabs);

    std::vector<Node> nodes_;
    int top_ = -1;
    int n_ = 0;
    std::uint64_t version_ = 0;
};

/// Per-edge cache of the quantities the algorithms compare: subtree edge
/// counts, heights, end counts n_e and their digit counts d_e.
///
/// d_e is the number of binary digits of (n_e - 1), i.e. the digits needed
/// to write the labels of T_e after shifting them to start at 0. With this
/// convention d_{e*} equals the global digit count d, leaves get d_e = 1,
/// and "every edge is d_e-sorted exactly on the fully-sorted tree" holds.
struct EdgeStats {
    std::vector<int> size;    // edges of T_e = 2*n_e - 1
    std::vector<int> ends;    // n_e
    std::vector<int> digits;  // d_e
    std::vector<int> height;  // root edge = 1
    int tree_height = 0;
};

EdgeStats edge_stats(const LabeledTree& t);

/// Number of binary digits of x (1 for x <= 1).
int digit_count(int x);

/// d_e for a subtree with `ends` ends.
int subtree_digits(int ends);

/// A subtree is full when it has 2^(height-1) ends, height counted from its
/// root edge = 1.
bool is_full_subtree(const LabeledTree& t, int node);

/// (2n-1)!! — the size of Tree(n) for n >= 1 (1 for n = 0).
std::uint64_t tree_space_size(int n);

/// Visit every element of Tree(n) exactly once. Guarded to n <= 9.
void enumerate_trees(int n, const std::function<void(const LabeledTree&)>& fn);

/// Uniform over Tree(n): sequential leaf insertion at a uniformly chosen
/// edge (Remy-style), which is exactly uniform over labeled shapes.
LabeledTree random_tree(int n, Rng& rng);

/// Left-leaning comb ((((0,1),2),3)...,n).
LabeledTree caterpillar_tree(int n);

} // namespace whitehead

#endif
