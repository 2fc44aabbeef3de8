#include "whitehead/tree.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

#include "whitehead/rng.hpp"

namespace whitehead {

int digit_count(int x) {
    if (x <= 1) return 1;
    return std::bit_width(static_cast<unsigned>(x));
}

int subtree_digits(int ends) {
    return ends <= 1 ? 1 : std::bit_width(static_cast<unsigned>(ends - 1));
}

std::uint64_t tree_space_size(int n) {
    std::uint64_t r = 1;
    for (int k = 3; k <= 2 * n - 1; k += 2) r *= static_cast<std::uint64_t>(k);
    return r;
}

LabeledTree LabeledTree::single_leaf() {
    LabeledTree t;
    t.top_ = t.add_leaf(0);
    t.n_ = 0;
    return t;
}

int LabeledTree::add_leaf(int lab) {
    Node nd;
    nd.label = lab;
    nd.ends = 1;
    nd.minlab = lab;
    nodes_.push_back(nd);
    return static_cast<int>(nodes_.size()) - 1;
}

int LabeledTree::add_internal() {
    Node nd;
    nodes_.push_back(nd);
    return static_cast<int>(nodes_.size()) - 1;
}

std::pair<int, int> LabeledTree::children(int node) const {
    const Node& nd = nodes_[node];
    int a = nd.child[0], b = nd.child[1];
    if (a < 0) return {-1, -1};
    if (nodes_[a].minlab > nodes_[b].minlab) std::swap(a, b);
    return {a, b};
}

int LabeledTree::sibling(int node) const {
    int par = nodes_[node].parent;
    if (par < 0) return -1;
    return nodes_[par].child[0] == node ? nodes_[par].child[1] : nodes_[par].child[0];
}

void LabeledTree::check_ref(const EdgeRef& e) const {
    if (e.node < 0 || e.node >= node_count())
        throw StaleEdgeError("edge ref points outside the node arena");
    if (e.version != version_)
        throw StaleEdgeError("stale edge ref: tree was mutated since the ref was taken");
}

std::string LabeledTree::address_of(int node) const {
    std::string rev;
    int cur = node;
    while (cur != top_) {
        int par = nodes_[cur].parent;
        auto [a, b] = children(par);
        rev.push_back(cur == a ? 'a' : 'b');
        cur = par;
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
}

int LabeledTree::resolve_address(std::string_view addr) const {
    int cur = top_;
    for (std::size_t i = 0; i < addr.size(); ++i) {
        char c = addr[i];
        if (c != 'a' && c != 'b') throw ParseError("bad edge address character", i);
        if (is_leaf(cur)) throw ParseError("edge address descends below a leaf", i);
        auto [a, b] = children(cur);
        cur = (c == 'a') ? a : b;
    }
    return cur;
}

void LabeledTree::replace_child(int par, int oldc, int newc) {
    Node& nd = nodes_[par];
    if (nd.child[0] == oldc) nd.child[0] = newc;
    else nd.child[1] = newc;
}

NodeStep LabeledTree::apply_pull(int edge_node, int pull_node) {
    if (!is_interior(edge_node))
        throw PreconditionError("whitehead step needs an interior edge");
    Node& v = nodes_[edge_node];
    if (v.child[0] != pull_node && v.child[1] != pull_node)
        throw PreconditionError("pull target is not a child of the step edge");
    int u = v.parent;
    int keep = (v.child[0] == pull_node) ? v.child[1] : v.child[0];
    int sib = sibling(edge_node);

    // Repartition {parent, pull} | {sibling, keep}.
    replace_child(u, sib, pull_node);
    nodes_[pull_node].parent = u;
    if (v.child[0] == pull_node) v.child[0] = sib; else v.child[1] = sib;
    nodes_[sib].parent = edge_node;

    v.ends = nodes_[sib].ends + nodes_[keep].ends;
    v.minlab = std::min(nodes_[sib].minlab, nodes_[keep].minlab);
    ++version_;
    return {edge_node, sib};
}

std::string LabeledTree::canonical() const {
    std::string out;
    out.reserve(static_cast<std::size_t>(node_count()) * 4);
    // Iterative DFS; frames carry the node and how far we got.
    struct Frame { int node; int stage; };
    std::vector<Frame> stack;
    stack.push_back({top_, 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (is_leaf(f.node)) {
            out += std::to_string(nodes_[f.node].label);
            stack.pop_back();
            continue;
        }
        auto [a, b] = children(f.node);
        if (f.stage == 0) {
            f.stage = 1;
            out.push_back('(');
            stack.push_back({a, 0});
        } else if (f.stage == 1) {
            f.stage = 2;
            out.push_back(',');
            stack.push_back({b, 0});
        } else {
            out.push_back(')');
            stack.pop_back();
        }
    }
    return out;
}

LabeledTree LabeledTree::parse(std::string_view text) {
    LabeledTree t;
    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) -> ParseError { return ParseError(msg, pos); };

    // Recursive descent over the grammar; returns the node id.
    std::function<int()> parse_tree = [&]() -> int {
        if (pos >= text.size()) throw fail("unexpected end of input");
        char c = text[pos];
        if (c == '(') {
            ++pos;
            int left = parse_tree();
            if (pos >= text.size() || text[pos] != ',') throw fail("expected ','");
            ++pos;
            int right = parse_tree();
            if (pos >= text.size() || text[pos] != ')') throw fail("expected ')'");
            ++pos;
            int node = t.add_internal();
            t.nodes_[node].child[0] = left;
            t.nodes_[node].child[1] = right;
            t.nodes_[left].parent = node;
            t.nodes_[right].parent = node;
            t.nodes_[node].ends = t.nodes_[left].ends + t.nodes_[right].ends;
            t.nodes_[node].minlab = std::min(t.nodes_[left].minlab, t.nodes_[right].minlab);
            return node;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) throw fail("expected label or '('");
        long val = 0;
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            val = val * 10 + (text[pos] - '0');
            if (val > 1'000'000'000L) { pos = start; throw fail("label out of range"); }
            ++pos;
        }
        return t.add_leaf(static_cast<int>(val));
    };

    t.top_ = parse_tree();
    if (pos != text.size()) throw fail("trailing characters after tree");

    int leaves = t.nodes_[t.top_].ends;
    t.n_ = leaves - 1;
    std::vector<int> seen(leaves, 0);
    for (const Node& nd : t.nodes_) {
        if (nd.label < 0) continue;
        if (nd.label >= leaves)
            throw ParseError("missing label " + std::to_string([&] {
                                 // report the smallest absent label
                                 std::vector<int> c(leaves, 0);
                                 for (const Node& m : t.nodes_)
                                     if (m.label >= 0 && m.label < leaves) c[m.label] = 1;
                                 for (int i = 0; i < leaves; ++i)
                                     if (!c[i]) return i;
                                 return leaves;
                             }()));
        if (seen[nd.label]++)
            throw ParseError("duplicate label " + std::to_string(nd.label));
    }
    for (int i = 0; i < leaves; ++i)
        if (!seen[i]) throw ParseError("missing label " + std::to_string(i));
    return t;
}

void LabeledTree::validate() const {
    if (top_ < 0 || top_ >= node_count()) throw InvariantError("no top node");
    int leaves = 0, internals = 0;
    std::vector<int> seen(n_ + 1, 0);
    std::vector<int> stack = {top_};
    int visited = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        ++visited;
        const Node& nd = nodes_[v];
        if (is_leaf(v)) {
            ++leaves;
            if (nd.label < 0 || nd.label > n_) throw InvariantError("leaf label out of range");
            if (seen[nd.label]++) throw InvariantError("duplicate leaf label");
            if (nd.ends != 1 || nd.minlab != nd.label) throw InvariantError("leaf cache wrong");
        } else {
            ++internals;
            if (nd.child[1] < 0) throw InvariantError("internal node without two children");
            int a = nd.child[0], b = nd.child[1];
            if (nodes_[a].parent != v || nodes_[b].parent != v)
                throw InvariantError("parent link mismatch");
            if (nd.ends != nodes_[a].ends + nodes_[b].ends) throw InvariantError("ends cache wrong");
            if (nd.minlab != std::min(nodes_[a].minlab, nodes_[b].minlab))
                throw InvariantError("minlab cache wrong");
            stack.push_back(a);
            stack.push_back(b);
        }
    }
    if (visited != node_count()) throw InvariantError("arena contains unreachable nodes");
    if (leaves != n_ + 1) throw InvariantError("leaf count != n+1");
    if (internals != n_) throw InvariantError("internal node count != n");
    // Edge counts follow: n+2 exterior (n+1 leaf edges + root edge), n-1 interior.
}

std::vector<int> LabeledTree::heights() const {
    std::vector<int> h(node_count(), 0);
    std::vector<int> stack = {top_};
    h[top_] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (is_leaf(v)) continue;
        const Node& nd = nodes_[v];
        h[nd.child[0]] = h[v] + 1;
        h[nd.child[1]] = h[v] + 1;
        stack.push_back(nd.child[0]);
        stack.push_back(nd.child[1]);
    }
    return h;
}

int LabeledTree::height() const {
    std::vector<int> h = heights();
    return *std::max_element(h.begin(), h.end());
}

std::vector<int> LabeledTree::postorder() const {
    std::vector<int> order;
    order.reserve(node_count());
    std::vector<int> stack = {top_};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        if (!is_leaf(v)) {
            stack.push_back(nodes_[v].child[0]);
            stack.push_back(nodes_[v].child[1]);
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

EdgeStats edge_stats(const LabeledTree& t) {
    EdgeStats s;
    int nc = t.node_count();
    s.ends.resize(nc);
    s.size.resize(nc);
    s.digits.resize(nc);
    s.height = t.heights();
    for (int v : t.postorder()) {
        s.ends[v] = t.ends(v);
        s.size[v] = 2 * s.ends[v] - 1;
        s.digits[v] = subtree_digits(s.ends[v]);
    }
    s.tree_height = *std::max_element(s.height.begin(), s.height.end());
    return s;
}

bool is_full_subtree(const LabeledTree& t, int node) {
    // height of the subtree rooted at `node`, its own root edge = 1
    std::vector<std::pair<int, int>> stack = {{node, 1}};
    int h = 1;
    while (!stack.empty()) {
        auto [v, d] = stack.back();
        stack.pop_back();
        h = std::max(h, d);
        if (!t.is_leaf(v)) {
            auto [a, b] = t.children(v);
            stack.push_back({a, d + 1});
            stack.push_back({b, d + 1});
        }
    }
    return t.ends(node) == (1 << (h - 1));
}

int LabeledTree::insert_leaf_at_edge(int at_node, int lab) {
    int leaf = add_leaf(lab);
    int mid = add_internal();
    int par = nodes_[at_node].parent;
    nodes_[mid].child[0] = at_node;
    nodes_[mid].child[1] = leaf;
    nodes_[mid].parent = par;
    nodes_[at_node].parent = mid;
    nodes_[leaf].parent = mid;
    nodes_[mid].ends = nodes_[at_node].ends + 1;
    nodes_[mid].minlab = std::min(nodes_[at_node].minlab, lab);
    if (par < 0) {
        top_ = mid;
    } else {
        replace_child(par, at_node, mid);
        for (int cur = par; cur >= 0; cur = nodes_[cur].parent) {
            nodes_[cur].ends += 1;
            nodes_[cur].minlab = std::min(nodes_[cur].minlab, lab);
        }
    }
    ++n_;
    ++version_;
    return mid;
}

void LabeledTree::remove_last_insertion(int mid, const std::vector<std::pair<int, int>>& saved_minlabs) {
    int at_node = nodes_[mid].child[0];
    int par = nodes_[mid].parent;
    nodes_[at_node].parent = par;
    if (par < 0) {
        top_ = at_node;
    } else {
        replace_child(par, mid, at_node);
        for (int cur = par; cur >= 0; cur = nodes_[cur].parent) nodes_[cur].ends -= 1;
        for (auto [node, ml] : saved_minlabs) nodes_[node].minlab = ml;
    }
    nodes_.pop_back();  // mid (added last)
    nodes_.pop_back();  // leaf
    --n_;
    ++version_;
}

void enumerate_trees(int n, const std::function<void(const LabeledTree&)>& fn) {
    if (n < 0 || n > 9)
        throw GuardError("enumerate_trees guarded to 0 <= n <= 9; Tree(n) has (2n-1)!! elements");
    LabeledTree t = LabeledTree::single_leaf();
    std::function<void(int)> rec = [&](int next_label) {
        if (next_label > n) {
            fn(t);
            return;
        }
        int edges = t.node_count();  // 2*next_label - 1 candidate edges
        for (int at = 0; at < edges; ++at) {
            std::vector<std::pair<int, int>> saved;
            for (int cur = t.nodes_[at].parent; cur >= 0; cur = t.nodes_[cur].parent)
                saved.push_back({cur, t.nodes_[cur].minlab});
            int mid = t.insert_leaf_at_edge(at, next_label);
            rec(next_label + 1);
            t.remove_last_insertion(mid, saved);
        }
    };
    rec(1);
}

LabeledTree random_tree(int n, Rng& rng) {
    LabeledTree t = LabeledTree::single_leaf();
    for (int lab = 1; lab <= n; ++lab) {
        int at = rng.below_int(t.node_count());
        t.insert_leaf_at_edge(at, lab);
    }
    return t;
}

LabeledTree caterpillar_tree(int n) {
    LabeledTree t = LabeledTree::single_leaf();
    for (int lab = 1; lab <= n; ++lab) t.insert_leaf_at_edge(t.top_, lab);
    return t;
}

} // namespace whitehead
