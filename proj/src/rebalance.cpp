#include "whitehead/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace whitehead {

namespace {

// Size of the subtree hanging below `node` in edges; -1 marks "missing".
inline int subtree_size(const LabeledTree& t, int node) {
    return node < 0 ? 0 : 2 * t.ends(node) - 1;
}

std::optional<NodeStep> decide(const LabeledTree& t, int e) {
    if (t.is_leaf(e)) return std::nullopt;
    auto [l, r] = t.children(e);
    // Grandchild subtrees under each child; a leaf child contributes none.
    int cand_child[4], cand_grand[4], size[4];
    int k = 0;
    for (int c : {l, r}) {
        if (t.is_leaf(c)) continue;
        auto [x, y] = t.children(c);
        cand_child[k] = c; cand_grand[k] = x; size[k] = subtree_size(t, x); ++k;
        cand_child[k] = c; cand_grand[k] = y; size[k] = subtree_size(t, y); ++k;
    }
    if (k == 0) return std::nullopt;
    int best = 0;
    bool unique = true;
    for (int i = 1; i < k; ++i) {
        if (size[i] > size[best]) { best = i; unique = true; }
        else if (size[i] == size[best]) unique = false;
    }
    // Missing grandchildren count as size 0 and present ones have size >= 1,
    // so the implicit zeros never tie a present maximum.
    if (!unique) return std::nullopt;
    return NodeStep{cand_child[best], cand_grand[best]};
}

} // namespace

BalanceDecision balance_move(const LabeledTree& t, EdgeRef e) {
    t.check_ref(e);
    return {e, decide(t, e.node)};
}

BalanceRound balance_round(const LabeledTree& t) {
    std::vector<int> h = t.heights();
    std::vector<NodeStep> steps;
    for (int v = 0; v < t.node_count(); ++v) {
        if (h[v] % 2 == 0) continue;
        if (auto s = decide(t, v)) steps.push_back(*s);
    }
    BalanceRound out{t, static_cast<int>(steps.size())};
    apply_block_inplace(out.tree, steps);  // asserts pairwise disjointness
    return out;
}

int reduce_round_budget(int n) {
    int r = 0;
    double x = 1.0;
    while (x < n + 1) { x *= 6.0 / 5.0; ++r; }
    return r;
}

double height_threshold(int n) { return 6.0 * std::log2(static_cast<double>(n)); }

ReduceResult reduce_height(const LabeledTree& t) {
    ReduceResult res{t};
    int n = t.complexity();
    if (n <= 1) return res;

    double threshold = height_threshold(n);
    int budget = reduce_round_budget(n);

    while (res.tree.height() > threshold) {
        std::vector<int> before = res.tree.heights();
        std::vector<int> hcopy = before;

        std::vector<NodeStep> steps;
        for (int v = 0; v < res.tree.node_count(); ++v) {
            if (hcopy[v] % 2 == 0) continue;
            if (auto s = decide(res.tree, v)) steps.push_back(*s);
        }
        res.script.blocks.push_back(block_to_lines(res.tree, steps));
        apply_block_inplace(res.tree, steps);
        ++res.rounds;

        std::vector<int> after = res.tree.heights();
        for (int v = 0; v < res.tree.node_count(); ++v) {
            if (before[v] > threshold && after[v] > (5 * before[v] + 5) / 6)
                throw InvariantError(
                    "balance round failed to contract edge height " + std::to_string(before[v]) +
                    " -> " + std::to_string(after[v]) + " at n=" + std::to_string(n));
        }
        res.trace.push_back({res.rounds, res.tree.height(), static_cast<int>(steps.size())});
        if (res.rounds > budget)
            throw InvariantError("height reduction exceeded its round budget " +
                                 std::to_string(budget) + " at n=" + std::to_string(n));
    }
    return res;
}

std::string ReduceResult::trace_csv() const {
    std::ostringstream os;
    os << "round,height,steps_fired\n";
    for (const ReduceTraceRow& r : trace)
        os << r.round << ',' << r.height << ',' << r.steps_fired << '\n';
    return os.str();
}

} // namespace whitehead
