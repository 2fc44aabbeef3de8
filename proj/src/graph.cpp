#include "whitehead/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <boost/multiprecision/cpp_int.hpp>

#include "whitehead/errors.hpp"
#include "whitehead/sort.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace whitehead {

int Multigraph::add_edge(int u, int v) {
    edges_.push_back({u, v});
    return edge_count() - 1;
}

int Multigraph::valence(int v) const {
    int d = 0;
    for (const auto& e : edges_) d += (e[0] == v) + (e[1] == v);
    return d;
}

std::vector<int> Multigraph::halves_at(int v) const {
    std::vector<int> hs;
    for (int i = 0; i < edge_count(); ++i) {
        if (edges_[i][0] == v) hs.push_back(2 * i);
        if (edges_[i][1] == v) hs.push_back(2 * i + 1);
    }
    return hs;
}

std::vector<std::vector<int>> Multigraph::adjacency() const {
    std::vector<std::vector<int>> adj(vcount_);
    for (const auto& e : edges_) {
        if (e[0] == e[1]) continue;
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    return adj;
}

bool Multigraph::connected() const {
    if (vcount_ == 0) return true;
    auto adj = adjacency();
    std::vector<char> seen(vcount_, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
    }
    return count == vcount_;
}

int Multigraph::diameter() const {
    auto adj = adjacency();
    int best = 0;
    std::vector<int> dist(vcount_);
    for (int s = 0; s < vcount_; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::queue<int> q;
        q.push(s);
        dist[s] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            best = std::max(best, dist[v]);
            for (int w : adj[v])
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
        }
        for (int v = 0; v < vcount_; ++v)
            if (dist[v] < 0) throw PreconditionError("diameter of a disconnected graph");
    }
    return best;
}

int Multigraph::girth(std::vector<int>* out_cycle) const {
    for (int i = 0; i < edge_count(); ++i)
        if (is_loop(i)) {
            if (out_cycle) *out_cycle = {i};
            return 1;
        }

    int best = 0;
    std::vector<int> best_cycle;
    std::vector<int> dist(vcount_), par_edge(vcount_), par_vertex(vcount_);

    // incidence by vertex
    std::vector<std::vector<std::pair<int, int>>> inc(vcount_);  // (neighbor, edge)
    for (int i = 0; i < edge_count(); ++i) {
        auto [u, v] = edge(i);
        inc[u].push_back({v, i});
        inc[v].push_back({u, i});
    }

    for (int s = 0; s < vcount_; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::queue<int> q;
        q.push(s);
        dist[s] = 0;
        par_edge[s] = -1;
        par_vertex[s] = -1;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (auto [w, e] : inc[v]) {
                if (e == par_edge[v]) continue;
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    par_edge[w] = e;
                    par_vertex[w] = v;
                    q.push(w);
                    continue;
                }
                // Non-tree edge: the two parent chains plus e close a cycle.
                std::vector<int> chain_v, chain_w, verts_v, verts_w;
                for (int x = v; x >= 0 && par_edge[x] >= 0; x = par_vertex[x]) {
                    chain_v.push_back(par_edge[x]);
                    verts_v.push_back(x);
                }
                verts_v.push_back(s);
                for (int x = w; x >= 0 && par_edge[x] >= 0; x = par_vertex[x]) {
                    chain_w.push_back(par_edge[x]);
                    verts_w.push_back(x);
                }
                verts_w.push_back(s);
                // trim the common tail
                while (chain_v.size() && chain_w.size() && chain_v.back() == chain_w.back()) {
                    chain_v.pop_back();
                    chain_w.pop_back();
                    verts_v.pop_back();
                    verts_w.pop_back();
                }
                int len = static_cast<int>(chain_v.size() + chain_w.size()) + 1;
                if (best == 0 || len < best) {
                    best = len;
                    // ordered cycle: up from v, across the meet, down to w, close with e
                    best_cycle.clear();
                    for (int x : chain_v) best_cycle.push_back(x);
                    for (auto it = chain_w.rbegin(); it != chain_w.rend(); ++it)
                        best_cycle.push_back(*it);
                    best_cycle.push_back(e);
                }
            }
        }
    }
    if (out_cycle) *out_cycle = best_cycle;
    return best;
}

void MarkedGraph::validate() const {
    if (!topo.connected()) throw InvariantError("marked graph must be connected");
    if (topo.rank() != g) throw InvariantError("rank != g");
    int marks_seen = 0;
    std::vector<char> have(p, 0);
    for (int v = 0; v < topo.vertex_count(); ++v) {
        int val = topo.valence(v);
        int m = mark[v];
        if (m >= 0) {
            if (val != 1) throw InvariantError("marked vertex must have valence 1");
            if (m >= p || have[m]) throw InvariantError("marks must be a bijection onto 0..p-1");
            have[m] = 1;
            ++marks_seen;
        } else if (val != 3) {
            throw InvariantError("unmarked vertex must have valence 3");
        }
    }
    if (marks_seen != p) throw InvariantError("mark count != p");
    if (topo.vertex_count() - p != 2 * g - 2 + p)
        throw InvariantError("trivalent vertex count != 2g-2+p");
}

std::string MarkedGraph::to_text() const {
    std::ostringstream os;
    os << "graph g=" << g << " p=" << p << "\n";
    for (int i = 0; i < topo.edge_count(); ++i) {
        auto [u, v] = topo.edge(i);
        os << "edge " << u << ' ' << v << "\n";
    }
    for (int v = 0; v < topo.vertex_count(); ++v)
        if (mark[v] >= 0) os << "mark " << v << ' ' << mark[v] << "\n";
    return os.str();
}

MarkedGraph MarkedGraph::parse(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line;
    int g = -1, p = -1;
    std::vector<std::pair<long, long>> raw_edges;
    std::vector<std::pair<long, long>> raw_marks;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        if (kw == "graph") {
            std::string a, b;
            if (!(ls >> a >> b) || a.rfind("g=", 0) != 0 || b.rfind("p=", 0) != 0)
                throw ParseError("bad graph header at line " + std::to_string(lineno));
            g = std::stoi(a.substr(2));
            p = std::stoi(b.substr(2));
        } else if (kw == "edge") {
            long u, v;
            if (!(ls >> u >> v) || u < 0 || v < 0)
                throw ParseError("bad edge line " + std::to_string(lineno));
            raw_edges.push_back({u, v});
        } else if (kw == "mark") {
            long v, lab;
            if (!(ls >> v >> lab) || v < 0 || lab < 0)
                throw ParseError("bad mark line " + std::to_string(lineno));
            raw_marks.push_back({v, lab});
        } else {
            throw ParseError("unknown keyword '" + kw + "' at line " + std::to_string(lineno));
        }
    }
    if (g < 0) throw ParseError("missing graph header");

    std::map<long, int> ids;
    auto intern = [&](long raw) {
        auto [it, fresh] = ids.insert({raw, static_cast<int>(ids.size())});
        (void)fresh;
        return it->second;
    };
    for (auto& [u, v] : raw_edges) {
        intern(u);
        intern(v);
    }
    for (auto& [v, lab] : raw_marks) intern(v);

    MarkedGraph gr;
    gr.g = g;
    gr.p = p;
    gr.topo = Multigraph(static_cast<int>(ids.size()));
    for (auto& [u, v] : raw_edges) gr.topo.add_edge(ids[u], ids[v]);
    gr.mark.assign(gr.topo.vertex_count(), -1);
    for (auto& [v, lab] : raw_marks) gr.mark[ids[v]] = static_cast<int>(lab);
    gr.validate();
    return gr;
}

// ---------------------------------------------------------------------------
// cut / glue

CutResult cut_to_tree(const MarkedGraph& gr) {
    gr.validate();
    if (2 * gr.g - 2 + gr.p < 1)
        throw PreconditionError("cut needs 2g-2+p >= 1");

    const Multigraph& t = gr.topo;
    int V = t.vertex_count(), E = t.edge_count();

    int start = 0;
    if (gr.p > 0)
        for (int v = 0; v < V; ++v)
            if (gr.mark[v] == 0) start = v;

    // deterministic BFS spanning tree, scanning edges in id order
    std::vector<std::vector<std::pair<int, int>>> inc(V);
    for (int i = 0; i < E; ++i) {
        auto [u, v] = t.edge(i);
        inc[u].push_back({v, i});
        inc[v].push_back({u, i});
    }
    std::vector<char> in_tree(E, 0), seen(V, 0);
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto [w, e] : inc[v]) {
            if (seen[w]) continue;
            seen[w] = 1;
            in_tree[e] = 1;
            q.push(w);
        }
    }

    std::vector<int> complement;
    for (int i = 0; i < E; ++i)
        if (!in_tree[i]) complement.push_back(i);
    std::sort(complement.begin(), complement.end(), [&](int a, int b) {
        auto [a0, a1] = t.edge(a);
        auto [b0, b1] = t.edge(b);
        auto ka = std::minmax(a0, a1), kb = std::minmax(b0, b1);
        if (ka != kb) return ka < kb;
        return a < b;
    });
    if (static_cast<int>(complement.size()) != gr.g)
        throw InvariantError("spanning tree complement must have g edges");

    // Cut-tree adjacency: graph vertices plus synthetic stub leaves.
    int nodes = V;
    std::vector<std::vector<int>> adj(V);
    std::vector<int> leaf_label;  // indexed by node - V for stubs
    auto add_stub = [&](int at, int label) {
        adj.push_back({at});
        adj[at].push_back(nodes);
        leaf_label.push_back(label);
        return nodes++;
    };
    for (int i = 0; i < E; ++i) {
        if (!in_tree[i]) continue;
        auto [u, v] = t.edge(i);
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    int root_stub = -1;
    for (std::size_t k = 0; k < complement.size(); ++k) {
        int e = complement[k];
        int ha = 2 * e, hb = 2 * e + 1;
        // the half at the smaller (vertex, half id) gets the even label
        if (std::make_pair(t.half_vertex(hb), hb) < std::make_pair(t.half_vertex(ha), ha))
            std::swap(ha, hb);
        add_stub(t.half_vertex(ha), gr.p + 2 * static_cast<int>(k));
        int odd = add_stub(t.half_vertex(hb), gr.p + 2 * static_cast<int>(k) + 1);
        if (k + 1 == complement.size()) root_stub = odd;
    }

    // root: the end with the highest label
    int top, skip_node;
    if (gr.g >= 1) {
        top = adj[root_stub][0];
        skip_node = root_stub;
    } else {
        // degenerate g=0: re-root at the highest mark
        int mv = -1;
        for (int v = 0; v < V; ++v)
            if (gr.mark[v] == gr.p - 1) mv = v;
        top = adj[mv][0];
        skip_node = mv;
    }

    std::function<std::string(int, int)> text = [&](int node, int from) -> std::string {
        if (node >= V) return std::to_string(leaf_label[node - V]);
        if (gr.mark[node] >= 0) return std::to_string(gr.mark[node]);
        std::vector<int> kids;
        for (int w : adj[node])
            if (w != from) kids.push_back(w);
        if (kids.size() != 2) throw InvariantError("cut tree is not binary");
        return "(" + text(kids[0], node) + "," + text(kids[1], node) + ")";
    };

    CutResult out;
    out.g = gr.g;
    out.p = gr.p;
    out.tree = LabeledTree::parse(text(top, skip_node));
    if (out.tree.complexity() != 2 * gr.g + gr.p - 2)
        throw InvariantError("cut tree has wrong complexity");
    return out;
}

MarkedGraph glue(const CutResult& cut) {
    const LabeledTree& t = cut.tree;
    int g = cut.g, p = cut.p;
    if (t.complexity() != 2 * g + p - 2)
        throw PreconditionError("cut result pairing does not match the tree complexity");

    std::vector<int> vertex_of(t.node_count(), -1);
    Multigraph topo;
    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_internal(v)) vertex_of[v] = topo.add_vertex();

    std::vector<int> leaf_of_label(t.complexity() + 1, -1);
    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_leaf(v)) leaf_of_label[t.label(v)] = v;

    MarkedGraph gr;
    gr.g = g;
    gr.p = p;

    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_internal(v) && v != t.top())
            topo.add_edge(vertex_of[t.parent(v)], vertex_of[v]);

    std::vector<int> marks;
    for (int lab = 0; lab < p; ++lab) {
        int leaf = leaf_of_label[lab];
        int mv = topo.add_vertex();
        topo.add_edge(vertex_of[t.parent(leaf)], mv);
        marks.push_back(mv);
    }
    for (int k = 0; k + 1 < g; ++k) {
        int a = leaf_of_label[p + 2 * k], b = leaf_of_label[p + 2 * k + 1];
        topo.add_edge(vertex_of[t.parent(a)], vertex_of[t.parent(b)]);
    }
    if (g >= 1) {
        int partner = leaf_of_label[2 * g + p - 2];
        topo.add_edge(vertex_of[t.top()], vertex_of[t.parent(partner)]);
    } else {
        int mv = topo.add_vertex();
        topo.add_edge(vertex_of[t.top()], mv);
        marks.push_back(mv);
    }

    gr.topo = topo;
    gr.mark.assign(topo.vertex_count(), -1);
    for (std::size_t i = 0; i < marks.size(); ++i) gr.mark[marks[i]] = static_cast<int>(i);
    gr.validate();
    return gr;
}

// ---------------------------------------------------------------------------
// Whitehead moves on graphs

namespace {

struct MoveEnds {
    int u, v;
    int a1, a2, b1, b2;  // adjacent halves: a* at u, b* at v, ascending
};

MoveEnds move_ends(const Multigraph& g, int e) {
    auto [u, v] = g.edge(e);
    if (u == v) throw PreconditionError("whitehead move needs an edge with distinct endpoints");
    if (g.valence(u) != 3 || g.valence(v) != 3)
        throw PreconditionError("whitehead move needs an interior edge");
    MoveEnds m{u, v, -1, -1, -1, -1};
    for (int h : g.halves_at(u)) {
        if (h == 2 * e || h == 2 * e + 1) continue;
        (m.a1 < 0 ? m.a1 : m.a2) = h;
    }
    for (int h : g.halves_at(v)) {
        if (h == 2 * e || h == 2 * e + 1) continue;
        (m.b1 < 0 ? m.b1 : m.b2) = h;
    }
    return m;
}

} // namespace

MarkedGraph graph_whitehead(const MarkedGraph& gr, int e, int direction) {
    if (e < 0 || e >= gr.topo.edge_count()) throw PreconditionError("edge index out of range");
    if (direction != 1 && direction != 2) throw PreconditionError("direction must be 1 or 2");
    MoveEnds m = move_ends(gr.topo, e);
    MarkedGraph out = gr;
    // direction 1 pairs {a1,b1}|{a2,b2}; direction 2 pairs {a1,b2}|{a2,b1}
    int to_u = (direction == 1) ? m.b1 : m.b2;
    out.topo.set_half_vertex(to_u, m.u);
    out.topo.set_half_vertex(m.a2, m.v);
    out.validate();
    return out;
}

int whitehead_direction_joining(const Multigraph& g, int e, int ha, int hb) {
    MoveEnds m = move_ends(g, e);
    int at_u = -1, at_v = -1;
    for (int h : {ha, hb}) {
        if (h == m.a1 || h == m.a2) at_u = h;
        if (h == m.b1 || h == m.b2) at_v = h;
    }
    if (at_u < 0 || at_v < 0)
        throw PreconditionError("halves are not adjacent to the move edge");
    bool dir1 = (at_u == m.a1 && at_v == m.b1) || (at_u == m.a2 && at_v == m.b2);
    return dir1 ? 1 : 2;
}

// ---------------------------------------------------------------------------
// constructions

namespace {

MarkedGraph finish_ends(Multigraph topo, const std::vector<int>& end_attach, int g, int p) {
    // first p ends carry marks 0..p-1, the rest close into loops
    MarkedGraph gr;
    std::vector<int> mark_vertex;
    for (std::size_t i = 0; i < end_attach.size(); ++i) {
        int w = topo.add_vertex();
        topo.add_edge(end_attach[i], w);
        if (static_cast<int>(i) < p) {
            mark_vertex.push_back(w);
        } else {
            topo.add_edge(w, w);
        }
    }
    gr.g = g;
    gr.p = p;
    gr.topo = topo;
    gr.mark.assign(topo.vertex_count(), -1);
    for (int i = 0; i < p; ++i) gr.mark[mark_vertex[i]] = i;
    gr.validate();
    return gr;
}

} // namespace

MarkedGraph make_line_graph(int g, int p) {
    int ends = g + p;
    if (2 * g - 2 + p <= 0 || ends < 2)
        throw PreconditionError("line graph needs 2g-2+p > 0");
    Multigraph topo;
    std::vector<int> attach;
    if (ends == 2) {
        // no spine: the two end vertices joined directly
        MarkedGraph gr;
        int u = topo.add_vertex(), v = topo.add_vertex();
        topo.add_edge(u, v);
        std::vector<int> mv;
        if (p >= 1) mv.push_back(u);
        else topo.add_edge(u, u);
        if (p >= 2) mv.push_back(v);
        else topo.add_edge(v, v);
        gr.g = g;
        gr.p = p;
        gr.topo = topo;
        gr.mark.assign(topo.vertex_count(), -1);
        for (std::size_t i = 0; i < mv.size(); ++i) gr.mark[mv[i]] = static_cast<int>(i);
        gr.validate();
        return gr;
    }
    int spine = ends - 2;
    for (int i = 0; i < spine; ++i) topo.add_vertex();
    for (int i = 0; i + 1 < spine; ++i) topo.add_edge(i, i + 1);
    attach.push_back(0);
    attach.push_back(0);
    for (int i = 1; i + 1 < spine; ++i) attach.push_back(i);
    if (spine >= 2) {
        attach.push_back(spine - 1);
        attach.push_back(spine - 1);
    } else {
        attach.push_back(0);  // spine == 1: all three ends on the single vertex
    }
    return finish_ends(topo, attach, g, p);
}

MarkedGraph make_bouquet_graph(int g, int p) {
    int ends = g + p;
    if (2 * g - 2 + p <= 0 || ends < 2)
        throw PreconditionError("bouquet graph needs 2g-2+p > 0");
    if (ends == 2) return make_line_graph(g, p);

    LabeledTree t = build_tn(ends - 2);
    Multigraph topo;
    std::vector<int> vertex_of(t.node_count(), -1);
    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_internal(v)) vertex_of[v] = topo.add_vertex();
    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_internal(v) && v != t.top())
            topo.add_edge(vertex_of[t.parent(v)], vertex_of[v]);

    std::vector<int> attach;  // label order 0..ends-2, then the root end
    std::vector<int> leaf_of_label(t.complexity() + 1, -1);
    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_leaf(v)) leaf_of_label[t.label(v)] = v;
    for (int lab = 0; lab <= t.complexity(); ++lab)
        attach.push_back(vertex_of[t.parent(leaf_of_label[lab])]);
    attach.push_back(vertex_of[t.top()]);
    return finish_ends(topo, attach, g, p);
}

// ---------------------------------------------------------------------------
// Cheeger constant

namespace {

struct CheegerContext {
    int edge_count = 0;
    int cap = 0;  // max subset size
    std::vector<std::uint32_t> adj;
};

CheegerContext cheeger_context(const MarkedGraph& gr) {
    CheegerContext ctx;
    const Multigraph& t = gr.topo;
    ctx.edge_count = t.edge_count();
    ctx.cap = ctx.edge_count / 2;
    ctx.adj.assign(ctx.edge_count, 0);
    for (int i = 0; i < ctx.edge_count; ++i) {
        auto [u, v] = t.edge(i);
        for (int j = 0; j < ctx.edge_count; ++j) {
            if (j == i) continue;
            auto [x, y] = t.edge(j);
            if (x == u || x == v || y == u || y == v) ctx.adj[i] |= (1u << j);
        }
    }
    return ctx;
}

int boundary_size(const CheegerContext& ctx, std::uint32_t subset) {
    int b = 0;
    std::uint32_t rest = subset;
    while (rest) {
        int e = std::countr_zero(rest);
        rest &= rest - 1;
        if (ctx.adj[e] & ~subset) ++b;
    }
    return b;
}

// strict total order on candidates, for deterministic minima
bool better(const CheegerValue& a, const CheegerValue& b) {
    long long lhs = static_cast<long long>(a.boundary) * b.size;
    long long rhs = static_cast<long long>(b.boundary) * a.size;
    if (lhs != rhs) return lhs < rhs;
    if (a.size != b.size) return a.size < b.size;
    return a.witness < b.witness;
}

void consider(const CheegerContext& ctx, std::uint32_t subset, CheegerValue& best) {
    CheegerValue cand;
    cand.size = std::popcount(subset);
    cand.boundary = boundary_size(ctx, subset);
    cand.witness = subset;
    if (best.size == 0 || better(cand, best)) best = cand;
}

// connected-subset enumeration: every connected superset of S (using edges
// outside `forbidden`) is visited exactly once
void grow(const CheegerContext& ctx, std::uint32_t S, std::uint32_t nbh, std::uint32_t forbidden,
          CheegerValue& best) {
    consider(ctx, S, best);
    if (std::popcount(S) >= ctx.cap) return;
    std::uint32_t ext = nbh & ~S & ~forbidden;
    while (ext) {
        int e = std::countr_zero(ext);
        ext &= ext - 1;
        grow(ctx, S | (1u << e), nbh | ctx.adj[e], forbidden, best);
        forbidden |= (1u << e);
    }
}

} // namespace

CheegerValue cheeger_exact(const MarkedGraph& gr, bool parallel, bool override_guard) {
    int E = gr.topo.edge_count();
    int limit = override_guard ? 26 : 20;
    if (E > limit)
        throw GuardError("cheeger exact mode guarded to |E| <= " + std::to_string(limit) +
                         "; use sampling mode for larger graphs");
    CheegerContext ctx = cheeger_context(gr);
    if (ctx.cap < 1) throw GuardError("no valid subgraph: |E|/2 < 1");

    CheegerValue best;
#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel
        {
            CheegerValue local;
#pragma omp for schedule(dynamic)
            for (int s = 0; s < E; ++s) {
                std::uint32_t forbidden = (1u << s) - 1;
                grow(ctx, 1u << s, ctx.adj[s], forbidden, local);
            }
#pragma omp critical
            {
                if (local.size > 0 && (best.size == 0 || better(local, best))) best = local;
            }
        }
        return best;
    }
#else
    (void)parallel;
#endif
    for (int s = 0; s < E; ++s) {
        std::uint32_t forbidden = (1u << s) - 1;
        grow(ctx, 1u << s, ctx.adj[s], forbidden, best);
    }
    return best;
}

CheegerValue cheeger_naive(const MarkedGraph& gr) {
    int E = gr.topo.edge_count();
    if (E > 16) throw GuardError("naive cheeger scan guarded to |E| <= 16");
    CheegerContext ctx = cheeger_context(gr);
    if (ctx.cap < 1) throw GuardError("no valid subgraph: |E|/2 < 1");
    CheegerValue best;
    for (std::uint32_t s = 1; s < (1u << E); ++s) {
        if (std::popcount(s) > ctx.cap) continue;
        consider(ctx, s, best);
    }
    return best;
}

CheegerValue cheeger_sampled(const MarkedGraph& gr, int samples, Rng& rng) {
    int E = gr.topo.edge_count();
    if (E > 31) throw GuardError("sampled cheeger mode supports up to 31 edges");
    CheegerContext ctx = cheeger_context(gr);
    if (ctx.cap < 1) throw GuardError("no valid subgraph: |E|/2 < 1");
    CheegerValue best;
    for (int it = 0; it < samples; ++it) {
        int target = 1 + rng.below_int(ctx.cap);
        std::uint32_t S = 1u << rng.below_int(E);
        std::uint32_t nbh = ctx.adj[std::countr_zero(S)];
        while (std::popcount(S) < target) {
            std::uint32_t ext = nbh & ~S;
            if (!ext) break;
            int nth = rng.below_int(std::popcount(ext));
            std::uint32_t pick = ext;
            for (int i = 0; i < nth; ++i) pick &= pick - 1;
            int e = std::countr_zero(pick);
            S |= (1u << e);
            nbh |= ctx.adj[e];
        }
        consider(ctx, S, best);
    }
    best.upper_bound_only = true;
    return best;
}

CheegerValue cheeger_ratio(const MarkedGraph& gr, const std::vector<int>& edge_subset) {
    CheegerContext ctx = cheeger_context(gr);
    std::uint32_t S = 0;
    for (int e : edge_subset) {
        if (e < 0 || e >= ctx.edge_count) throw PreconditionError("edge index out of range");
        S |= (1u << e);
    }
    if (std::popcount(S) < 1 || std::popcount(S) > ctx.cap)
        throw PreconditionError("witness subset must have 1 <= |D| <= |E|/2 edges");
    CheegerValue out;
    consider(ctx, S, out);
    out.upper_bound_only = true;
    return out;
}

bool is_expander_witness(const MarkedGraph& gr, double delta, bool override_guard) {
    return cheeger_exact(gr, true, override_guard).value() >= delta;
}

// ---------------------------------------------------------------------------
// loop shortening

ShortenResult shorten_loop(const MarkedGraph& gr) {
    ShortenResult out{gr, 0};
    std::vector<int> cycle;
    int len = out.graph.topo.girth(&cycle);
    if (len == 0) throw PreconditionError("graph has no cycle");
    int initial = len;
    while (len > 1) {
        // vertices along the cycle, oriented
        const Multigraph& t = out.graph.topo;
        int e1 = cycle[0];
        int prev = cycle[len - 1], next = cycle[1 % len];
        auto [u, v] = t.edge(e1);
        // orient: u carries the half of `prev`, v the half of `next`
        auto touches = [&](int e, int vertex) {
            auto [a, b] = t.edge(e);
            return a == vertex || b == vertex;
        };
        if (!touches(prev, u)) std::swap(u, v);
        if (len == 2) {
            // two parallel edges; both other edges coincide
            next = prev;
        }
        int ha = -1, hb = -1;
        for (int h : {2 * prev, 2 * prev + 1})
            if (t.half_vertex(h) == u) ha = h;
        for (int h : {2 * next, 2 * next + 1})
            if (t.half_vertex(h) == v && h != ha) hb = h;
        if (ha < 0 || hb < 0) throw InvariantError("cycle orientation lost");
        int dir = whitehead_direction_joining(t, e1, ha, hb);
        out.graph = graph_whitehead(out.graph, e1, dir);
        ++out.moves;
        int new_len = out.graph.topo.girth(&cycle);
        if (new_len >= len)
            throw InvariantError("loop shortening failed to shorten the shortest cycle");
        len = new_len;
        if (out.moves > initial)
            throw InvariantError("loop shortening exceeded the initial cycle length");
    }
    return out;
}

// ---------------------------------------------------------------------------
// cardinality formulas

namespace bmp = boost::multiprecision;

namespace {

bmp::cpp_int factorial(int n) {
    bmp::cpp_int r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

double log2_big(const bmp::cpp_int& x) {
    if (x <= 0) return 0.0;
    std::size_t bits = bmp::msb(x);
    if (bits <= 52) return std::log2(x.convert_to<double>());
    bmp::cpp_int top = x >> (bits - 52);
    return static_cast<double>(bits - 52) + std::log2(top.convert_to<double>());
}

} // namespace

CardinalityRecord cardinality_formulas(int g, int p) {
    if (2 * g - 2 + p <= 0) throw PreconditionError("cardinality formulas need 2g-2+p > 0");
    bmp::cpp_int num = factorial(6 * g + 2 * p);
    bmp::cpp_int labeled = num / (factorial(g) * factorial(2 * g + p));
    bmp::cpp_int unlabeled = labeled / factorial(p);
    CardinalityRecord rec;
    rec.labeled = labeled.str();
    rec.unlabeled = unlabeled.str();
    rec.log2_labeled = log2_big(labeled);
    rec.log2_unlabeled = log2_big(unlabeled);
    return rec;
}

// ---------------------------------------------------------------------------
// isomorphism

namespace {

struct IsoProfile {
    std::vector<int> color;
    std::vector<std::map<int, int>> mult;  // neighbor -> multiplicity
    std::vector<int> loops;
    std::vector<int> valence;
};

// Color refinement over both graphs at once, so color ids are comparable
// across them.
std::pair<IsoProfile, IsoProfile> joint_profile(const MarkedGraph& a, const MarkedGraph& b) {
    auto fill = [](const MarkedGraph& gr, IsoProfile& pr) {
        const Multigraph& t = gr.topo;
        int V = t.vertex_count();
        pr.mult.assign(V, {});
        pr.loops.assign(V, 0);
        pr.valence.assign(V, 0);
        for (int i = 0; i < t.edge_count(); ++i) {
            auto [u, v] = t.edge(i);
            pr.valence[u] += 1;
            pr.valence[v] += 1;
            if (u == v) ++pr.loops[u];
            else {
                ++pr.mult[u][v];
                ++pr.mult[v][u];
            }
        }
        pr.color.assign(V, 0);
    };
    IsoProfile pa, pb;
    fill(a, pa);
    fill(b, pb);

    std::map<std::tuple<int, int, int>, int> seed;
    auto seed_colors = [&](const MarkedGraph& gr, IsoProfile& pr) {
        for (int v = 0; v < gr.topo.vertex_count(); ++v) {
            auto key = std::make_tuple(gr.mark[v], pr.valence[v], pr.loops[v]);
            auto [it, fresh] = seed.insert({key, static_cast<int>(seed.size())});
            (void)fresh;
            pr.color[v] = it->second;
        }
    };
    seed_colors(a, pa);
    seed_colors(b, pb);

    for (int round = 0; round < 3; ++round) {
        std::map<std::pair<int, std::vector<std::pair<int, int>>>, int> next;
        auto refine = [&](IsoProfile& pr, std::vector<int>& out) {
            int V = static_cast<int>(pr.color.size());
            out.resize(V);
            for (int v = 0; v < V; ++v) {
                std::vector<std::pair<int, int>> sig;
                for (auto [w, m] : pr.mult[v]) sig.push_back({pr.color[w], m});
                std::sort(sig.begin(), sig.end());
                auto key = std::make_pair(pr.color[v], sig);
                auto [it, fresh] = next.insert({key, static_cast<int>(next.size())});
                (void)fresh;
                out[v] = it->second;
            }
        };
        std::vector<int> na, nb;
        refine(pa, na);
        refine(pb, nb);
        pa.color = na;
        pb.color = nb;
    }
    return {pa, pb};
}

} // namespace

bool isomorphic(const MarkedGraph& a, const MarkedGraph& b) {
    if (a.g != b.g || a.p != b.p) return false;
    if (a.topo.vertex_count() != b.topo.vertex_count()) return false;
    if (a.topo.edge_count() != b.topo.edge_count()) return false;
    int V = a.topo.vertex_count();

    auto [pa, pb] = joint_profile(a, b);
    {
        std::vector<int> ca = pa.color, cb = pb.color;
        std::sort(ca.begin(), ca.end());
        std::sort(cb.begin(), cb.end());
        if (ca != cb) return false;
    }

    // order vertices of `a` so each one after the first touches a mapped one
    std::vector<int> order;
    {
        std::vector<char> seen(V, 0);
        std::vector<int> stack = {0};
        seen[0] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (auto [w, m] : pa.mult[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        if (static_cast<int>(order.size()) != V) return false;  // disconnected
    }

    std::vector<int> map_ab(V, -1), used(V, 0);
    // candidate compatibility keyed by the refined signatures
    auto compatible = [&va_profile = pa, &vb_profile = pb, &a, &b, &map_ab](int va, int vb) {
        if (a.mark[va] != b.mark[vb]) return false;
        if (va_profile.loops[va] != vb_profile.loops[vb]) return false;
        if (va_profile.valence[va] != vb_profile.valence[vb]) return false;
        for (auto [w, m] : va_profile.mult[va]) {
            if (map_ab[w] < 0) continue;
            auto it = vb_profile.mult[vb].find(map_ab[w]);
            if (it == vb_profile.mult[vb].end() || it->second != m) return false;
        }
        return true;
    };

    // group b-vertices by refined color for candidate lists
    std::vector<std::vector<int>> by_color;
    {
        int maxc = 0;
        for (int c : pb.color) maxc = std::max(maxc, c + 1);
        by_color.assign(maxc, {});
        for (int v = 0; v < V; ++v) by_color[pb.color[v]].push_back(v);
    }

    std::function<bool(std::size_t)> rec = [&](std::size_t idx) -> bool {
        if (idx == order.size()) return true;
        int va = order[idx];
        int color = pa.color[va];
        if (color >= static_cast<int>(by_color.size())) return false;
        for (int vb : by_color[color]) {
            if (used[vb] || !compatible(va, vb)) continue;
            map_ab[va] = vb;
            used[vb] = 1;
            if (rec(idx + 1)) return true;
            map_ab[va] = -1;
            used[vb] = 0;
        }
        return false;
    };
    if (!rec(0)) return false;

    // final defensive check: full edge multiset must match under the map
    for (int v = 0; v < V; ++v) {
        if (pa.loops[v] != pb.loops[map_ab[v]]) return false;
        for (auto [w, m] : pa.mult[v]) {
            auto it = pb.mult[map_ab[v]].find(map_ab[w]);
            if (it == pb.mult[map_ab[v]].end() || it->second != m) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// random generators

MarkedGraph random_marked_graph(int g, int p, Rng& rng) {
    if (2 * g - 2 + p < 1) throw PreconditionError("graph family needs 2g-2+p >= 1");
    LabeledTree t = random_tree(2 * g + p - 2, rng);
    CutResult cut{std::move(t), g, p};
    return glue(cut);
}

MarkedGraph random_trivalent_graph(int vertices, Rng& rng, bool forbid_loops) {
    if (vertices < 2 || vertices % 2 != 0)
        throw PreconditionError("a trivalent graph needs an even vertex count >= 2");
    for (int attempt = 0; attempt < 4096; ++attempt) {
        std::vector<int> stubs;
        stubs.reserve(3 * vertices);
        for (int v = 0; v < vertices; ++v)
            for (int i = 0; i < 3; ++i) stubs.push_back(v);
        for (int i = static_cast<int>(stubs.size()) - 1; i > 0; --i)
            std::swap(stubs[i], stubs[rng.below_int(i + 1)]);
        Multigraph topo(vertices);
        bool ok = true;
        for (std::size_t i = 0; i < stubs.size(); i += 2) {
            if (forbid_loops && stubs[i] == stubs[i + 1]) {
                ok = false;
                break;
            }
            topo.add_edge(stubs[i], stubs[i + 1]);
        }
        if (!ok || !topo.connected()) continue;
        MarkedGraph gr;
        gr.topo = topo;
        gr.g = topo.rank();
        gr.p = 0;
        gr.mark.assign(vertices, -1);
        gr.validate();
        return gr;
    }
    throw GuardError("failed to sample a connected trivalent graph");
}

} // namespace whitehead
