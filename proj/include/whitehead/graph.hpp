#ifndef WHITEHEAD_GRAPH_HPP
#define WHITEHEAD_GRAPH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "whitehead/rng.hpp"
#include "whitehead/tree.hpp"

namespace whitehead {

/// Undirected multigraph on vertices 0..V-1. Edge i has half-edges 2i and
/// 2i+1; loops and parallel edges are first class.
class Multigraph {
public:
    Multigraph() = default;
    explicit Multigraph(int vertices) : vcount_(vertices) {}

    int vertex_count() const { return vcount_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    int add_vertex() { return vcount_++; }
    int add_edge(int u, int v);

    std::pair<int, int> edge(int i) const { return {edges_[i][0], edges_[i][1]}; }
    bool is_loop(int i) const { return edges_[i][0] == edges_[i][1]; }
    int half_vertex(int half) const { return edges_[half / 2][half & 1]; }
    void set_half_vertex(int half, int v) { edges_[half / 2][half & 1] = v; }

    int valence(int v) const;
    std::vector<int> halves_at(int v) const;        // half-edge ids, ascending
    std::vector<std::vector<int>> adjacency() const;  // ignoring multiplicity/loops for BFS

    bool connected() const;
    int rank() const { return edge_count() - vertex_count() + 1; }

    /// Max over vertex pairs of unweighted shortest-path length.
    int diameter() const;

    /// Length of the shortest cycle in edges (1 for a loop, 2 for a parallel
    /// pair); 0 if the graph is a forest. If `out_cycle` is given it
    /// receives the edge ids of one shortest cycle in order.
    int girth(std::vector<int>* out_cycle = nullptr) const;

private:
    int vcount_ = 0;
    std::vector<std::array<int, 2>> edges_;
};

/// Connected multigraph of rank g with p marked valence-1 vertices and
/// 2g-2+p trivalent vertices.
struct MarkedGraph {
    Multigraph topo;
    std::vector<int> mark;  // per vertex: label in 0..p-1, or -1
    int g = 0;
    int p = 0;

    void validate() const;  // throws InvariantError

    std::string to_text() const;
    static MarkedGraph parse(std::string_view text);
};

/// Result of cutting a marked graph along a spanning-tree complement:
/// a labeled tree of complexity 2g+p-2 plus the gluing rule. End p+2k is
/// glued to p+2k+1; the end 2g+p-1 was erased to become the root. For g=0
/// the root comes from the highest mark instead.
struct CutResult {
    LabeledTree tree;
    int g = 0;
    int p = 0;
};

CutResult cut_to_tree(const MarkedGraph& gr);
MarkedGraph glue(const CutResult& cut);

/// Whitehead move on an interior graph edge (both endpoints trivalent and
/// distinct): repartition of the four adjacent half-edges. The two
/// directions index the two alternative pairings of the smallest adjacent
/// half at one endpoint.
MarkedGraph graph_whitehead(const MarkedGraph& gr, int edge, int direction);

/// Direction that groups half-edge `ha` (at one endpoint of `edge`) with
/// half-edge `hb` (at the other endpoint) on a single vertex.
int whitehead_direction_joining(const Multigraph& g, int edge, int ha, int hb);

/// Caterpillar tree with g+p exterior edges, g of them closed into loops at
/// their end vertices and p carrying marks 0..p-1 in spine order.
MarkedGraph make_line_graph(int g, int p);

/// Fully-sorted tree shape with g+p exterior edges, loops on the g highest
/// ends (root end included), marks 0..p-1 on the lowest labeled ends.
MarkedGraph make_bouquet_graph(int g, int p);

/// Exact Cheeger constant as a fraction: min |dD|/|D| over connected edge
/// subsets D with 1 <= |D| <= |E|/2, where dD is the set of edges of D that
/// share a vertex with an edge outside D.
struct CheegerValue {
    int boundary = 0;
    int size = 0;
    std::uint32_t witness = 0;  // edge bitmask attaining the minimum
    bool upper_bound_only = false;
    double value() const { return static_cast<double>(boundary) / size; }
};

/// Exhaustive search over connected subsets; |E| <= 20 unless overridden.
CheegerValue cheeger_exact(const MarkedGraph& gr, bool parallel = true,
                           bool override_guard = false);

/// Independent oracle: plain scan of all 2^E subsets (connected or not);
/// |E| <= 16.
CheegerValue cheeger_naive(const MarkedGraph& gr);

/// Sampling mode for larger graphs: min over random connected subsets,
/// tagged as an upper bound only.
CheegerValue cheeger_sampled(const MarkedGraph& gr, int samples, Rng& rng);

/// |dD|/|D| for one explicit edge subset.
CheegerValue cheeger_ratio(const MarkedGraph& gr, const std::vector<int>& edge_subset);

bool is_expander_witness(const MarkedGraph& gr, double delta, bool override_guard = false);

struct ShortenResult {
    MarkedGraph graph;
    int moves = 0;
};

/// Whitehead moves along a shortest cycle until a length-1 loop exists.
ShortenResult shorten_loop(const MarkedGraph& gr);

/// Exact values of the two counting expressions (6g+2p)!/(g!(2g+p)!) and
/// (6g+2p)!/(g!p!(2g+p)!) with their base-2 logarithms. These are
/// asymptotic-order quantities, correct up to exponential factors.
struct CardinalityRecord {
    std::string labeled;    // exact decimal
    std::string unlabeled;  // exact decimal
    double log2_labeled = 0;
    double log2_unlabeled = 0;
};

CardinalityRecord cardinality_formulas(int g, int p);

/// Exact isomorphism of marked multigraphs: a vertex bijection preserving
/// marks and edge multiplicities (loops included).
bool isomorphic(const MarkedGraph& a, const MarkedGraph& b);

/// Random element of Graph(g,p): a uniform random labeled tree glued along
/// the standard pairing.
MarkedGraph random_marked_graph(int g, int p, Rng& rng);

/// Random connected trivalent graph on `vertices` vertices (configuration
/// model with retries); optionally rejecting loops.
MarkedGraph random_trivalent_graph(int vertices, Rng& rng, bool forbid_loops = false);

} // namespace whitehead

#endif
