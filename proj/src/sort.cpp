#include "whitehead/sort.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "whitehead/rebalance.hpp"

namespace whitehead {

LabeledTree build_tn(int n) {
    // Emit the textual form recursively, then parse; construction is not hot.
    std::function<std::string(int, int)> emit = [&](int k, int shift) -> std::string {
        if (k == 0) return std::to_string(shift);
        int m = std::bit_width(static_cast<unsigned>(k)) - 1;  // 2^m <= k
        std::string left = emit((1 << m) - 1, shift);
        std::string right = emit(k - (1 << m), shift + (1 << m));
        return "(" + left + "," + right + ")";
    };
    return LabeledTree::parse(emit(n, 0));
}

namespace {

inline int bitwidth(unsigned x) { return x == 0 ? 0 : std::bit_width(x); }

// Minimal sortedness from the subtree masks: an internal edge with digit
// span bw is bw-sorted when its children split purely at digit bw, and
// (bw+1)-sorted otherwise; leaves are 1-sorted.
inline int sortedness_from_masks(const LabeledTree& t, int v, const std::vector<unsigned>& andm,
                                 const std::vector<unsigned>& orm) {
    if (t.is_leaf(v)) return 1;
    unsigned diff = andm[v] ^ orm[v];
    int bw = bitwidth(diff);
    auto [a, b] = t.children(v);
    unsigned bit = 1u << (bw - 1);
    bool a_pure0 = !(orm[a] & bit), a_pure1 = (andm[a] & bit);
    bool b_pure0 = !(orm[b] & bit), b_pure1 = (andm[b] & bit);
    bool split = (a_pure0 && b_pure1) || (a_pure1 && b_pure0);
    return split ? bw : bw + 1;
}

} // namespace

SortScan scan(const LabeledTree& t) {
    SortScan s;
    int nc = t.node_count();
    s.d = digit_count(t.complexity());
    s.and_mask.resize(nc);
    s.or_mask.resize(nc);
    s.sortedness.resize(nc);
    s.presorted.assign(nc, 0);
    s.ripe.assign(nc, 1);

    for (int v : t.postorder()) {
        if (t.is_leaf(v)) {
            s.and_mask[v] = s.or_mask[v] = static_cast<unsigned>(t.label(v));
            s.sortedness[v] = 1;
            continue;
        }
        auto [a, b] = t.children(v);
        s.and_mask[v] = s.and_mask[a] & s.and_mask[b];
        s.or_mask[v] = s.or_mask[a] | s.or_mask[b];
        s.sortedness[v] = sortedness_from_masks(t, v, s.and_mask, s.or_mask);

        // pre-sorted level: only k = bw(diff) can work, and only when the
        // edge itself missed it but both children reached it
        unsigned diff = s.and_mask[v] ^ s.or_mask[v];
        int bw = bitwidth(diff);
        if (s.sortedness[v] == bw + 1 && s.sortedness[a] <= bw && s.sortedness[b] <= bw)
            s.presorted[v] = bw;

        // ripeness condition at v, then conjunction over the subtree
        int k = s.sortedness[v];
        bool ok = true;
        for (int c : {a, b}) {
            if (t.is_leaf(c)) continue;
            if (s.sortedness[c] <= k - 1 || s.presorted[c] == k - 1) continue;
            ok = false;
        }
        s.ripe[v] = ok && s.ripe[a] && s.ripe[b];
    }
    return s;
}

bool SortScan::fully_sorted(const LabeledTree& t) const {
    for (int v = 0; v < t.node_count(); ++v)
        if (sortedness[v] > subtree_digits(t.ends(v))) return false;
    return true;
}

long long SortScan::level_sum() const {
    long long sum = 0;
    for (int s : sortedness) sum += s;
    return sum;
}

int sortedness(const LabeledTree& t, EdgeRef e) {
    t.check_ref(e);
    SortScan s = scan(t);
    return s.sortedness[e.node];
}

bool is_fully_sorted(const LabeledTree& t) {
    return scan(t).fully_sorted(t);
}

std::optional<int> presorted_level(const LabeledTree& t, EdgeRef e) {
    t.check_ref(e);
    if (t.is_leaf(e.node)) throw PreconditionError("pre-sortedness needs an edge with children");
    SortScan s = scan(t);
    if (s.presorted[e.node] == 0) return std::nullopt;
    return s.presorted[e.node];
}

bool is_ripe(const LabeledTree& t, EdgeRef e) {
    t.check_ref(e);
    return scan(t).ripe[e.node] != 0;
}

namespace {

// Split one mixed child into its digit blocks at `bit`: children of `child`
// in (0-block, 1-block) order. The caller guarantees the child is mixed, so
// it is internal and its two children are pure with opposite digits (the
// child is k-sorted via the pure split).
std::pair<int, int> blocks_of(const LabeledTree& t, const SortScan& s, int child, unsigned bit) {
    auto [x, y] = t.children(child);
    bool x_is_zero = !(s.or_mask[x] & bit);
    return x_is_zero ? std::make_pair(x, y) : std::make_pair(y, x);
}

SortMovePlan make_plan(const LabeledTree& t, const SortScan& s, int v, int k) {
    SortMovePlan plan;
    plan.edge = t.edge(v);
    plan.level = k;
    unsigned bit = 1u << (k - 1);
    auto [l, r] = t.children(v);
    bool l_pure = !(s.or_mask[l] & bit) || ((s.and_mask[l] & bit) != 0);
    bool r_pure = !(s.or_mask[r] & bit) || ((s.and_mask[r] & bit) != 0);

    if (!l_pure && !r_pure) {
        // Type 1: swap the 1-block of one child with the 0-block of the other.
        auto [a, bblk] = blocks_of(t, s, l, bit);  // l = (a | 0s, b | 1s)
        auto [c, dblk] = blocks_of(t, s, r, bit);  // r = (c | 0s, d | 1s)
        plan.type = 1;
        plan.steps = {{l, bblk}, {r, dblk}, {l, r}};
        // After step 1 the node l holds {r, a}; after step 2 the node r
        // holds {a, c} and l holds {d, r}; step 3 pulls r back up, leaving
        // v = (r, l) with r the 0-labels and l the 1-labels.
        return plan;
    }
    if (l_pure == r_pure)
        throw InvariantError("pre-sorted edge with two pure children cannot happen");

    int pure = l_pure ? l : r;
    int mixed = l_pure ? r : l;
    bool pure_is_zero = !(s.or_mask[pure] & bit);
    auto [z0, z1] = blocks_of(t, s, mixed, bit);
    // Pull the block whose digit differs from the pure sibling; the matching
    // block regroups with the sibling under the mixed child's node.
    plan.type = l_pure ? 2 : 3;
    plan.steps = {{mixed, pure_is_zero ? z1 : z0}};
    return plan;
}

} // namespace

SortMovePlan plan_sort_move(const LabeledTree& t, EdgeRef e, int k) {
    t.check_ref(e);
    if (t.is_leaf(e.node)) throw PreconditionError("sort move needs an edge with children");
    SortScan s = scan(t);
    if (s.presorted[e.node] != k)
        throw PreconditionError("edge is not pre-sorted at the requested level");
    return make_plan(t, s, e.node, k);
}

int sort_round_budget(int height, int d) { return std::max(1, (height - 3) + d + 2); }

namespace {

int max_unsorted_level(const LabeledTree& t, const SortScan& s) {
    int m = 0;
    for (int v = 0; v < t.node_count(); ++v)
        if (s.sortedness[v] > subtree_digits(t.ends(v))) m = std::max(m, s.sortedness[v]);
    return m;
}

SortRound run_round(LabeledTree tree, int round_index) {
    SortScan pre = scan(tree);
    std::vector<char> children_ripe(tree.node_count(), 1);
    for (int v = 0; v < tree.node_count(); ++v) {
        if (tree.is_leaf(v)) continue;
        auto [a, b] = tree.children(v);
        children_ripe[v] = pre.ripe[a] && pre.ripe[b];
    }
    long long measure_before = pre.level_sum();

    std::vector<SortMovePlan> plans;
    std::vector<std::pair<int, int>> planned;  // (node, level) for post checks
    for (int v = 0; v < tree.node_count(); ++v) {
        if (pre.presorted[v] && pre.ripe[v]) {
            plans.push_back(make_plan(tree, pre, v, pre.presorted[v]));
            planned.push_back({v, pre.presorted[v]});
        }
    }
    if (plans.empty())
        throw InvariantError("sort round found no pre-sorted ripe edge on an unsorted tree");

    SortRound out{std::move(tree)};
    out.selected_edges = static_cast<int>(plans.size());

    for (int phase = 1; phase <= 3; ++phase) {
        std::vector<NodeStep> steps;
        for (const SortMovePlan& p : plans)
            if (static_cast<int>(p.steps.size()) >= phase) steps.push_back(p.steps[phase - 1]);
        if (!steps.empty()) {
            out.script_blocks.push_back(block_to_lines(out.tree, steps));
            apply_block_inplace(out.tree, steps);  // asserts phase disjointness
            ++out.phases_applied;
        }
        SortScan mid = scan(out.tree);
        out.trace.push_back({round_index, phase, static_cast<int>(steps.size()),
                             max_unsorted_level(out.tree, mid), out.tree.height()});
    }

    SortScan post = scan(out.tree);
    for (auto [v, k] : planned)
        if (post.sortedness[v] > k)
            throw InvariantError("sort move failed to make its edge " + std::to_string(k) +
                                 "-sorted");
    for (int v = 0; v < out.tree.node_count(); ++v)
        if (children_ripe[v] && !post.ripe[v])
            throw InvariantError("ripeness was not preserved across a sort round");
    if (post.level_sum() >= measure_before)
        throw InvariantError("sort round did not decrease the sortedness measure");
    return out;
}

} // namespace

SortRound sort_round(const LabeledTree& t, int round_index) {
    if (is_fully_sorted(t)) throw PreconditionError("tree is already sorted");
    return run_round(t, round_index);
}

SortResult sort_tree(const LabeledTree& t) {
    SortResult res{t};
    int n = t.complexity();
    if (n <= 1) return res;

    int h = t.height();
    if (h > height_threshold(n))
        throw PreconditionError("sort requires height <= 6*log2(n); run reduce_height first");
    int d = digit_count(n);
    int budget = sort_round_budget(h, d);

    while (!is_fully_sorted(res.tree)) {
        SortRound round = run_round(std::move(res.tree), res.rounds + 1);
        res.tree = std::move(round.tree);
        ++res.rounds;
        res.sim_moves += round.phases_applied;
        for (const SortTraceRow& row : round.trace) res.trace.push_back(row);
        for (auto& block : round.script_blocks) res.script.blocks.push_back(std::move(block));
        if (res.rounds > budget) {
            std::ostringstream os;
            os << "sort exceeded its round budget " << budget << " (h=" << h << ", d=" << d
               << ", n=" << n << ")";
            throw InvariantError(os.str());
        }
    }
    return res;
}

std::string SortResult::trace_csv() const {
    std::ostringstream os;
    os << "round,phase,steps,max_unsorted_level,height\n";
    for (const SortTraceRow& r : trace)
        os << r.round << ',' << r.phase << ',' << r.steps << ',' << r.max_unsorted_level << ','
           << r.height << '\n';
    return os.str();
}

namespace {

// Inverse of an applied block, in script form against the tree state that
// resulted from the block. Built eagerly during the forward run.
struct ReplayLog {
    std::vector<std::vector<MoveScript::Line>> inverse_blocks;
};

MoveScript pipeline_script(const LabeledTree& start, ReduceResult& red, SortResult& srt) {
    MoveScript s = red.script;
    for (auto& b : srt.script.blocks) s.blocks.push_back(b);
    (void)start;
    return s;
}

// Reverse a script by replaying it and recording inverse blocks.
MoveScript invert_script(const LabeledTree& start, const MoveScript& script) {
    MoveScript inv;
    LabeledTree cur = start;
    std::vector<std::vector<MoveScript::Line>> backward;
    for (const auto& block : script.blocks) {
        std::vector<NodeStep> steps;
        for (const MoveScript::Line& line : block) {
            int node = cur.resolve_address(line.address);
            auto [a, b] = cur.children(node);
            steps.push_back({node, line.direction == 1 ? a : b});
        }
        std::vector<NodeStep> inverse = apply_block_inplace(cur, steps);
        backward.push_back(block_to_lines(cur, inverse));
    }
    for (auto it = backward.rbegin(); it != backward.rend(); ++it) inv.blocks.push_back(*it);
    return inv;
}

} // namespace

UpperBoundResult distance_upper(const LabeledTree& t1, const LabeledTree& t2) {
    if (t1.complexity() != t2.complexity())
        throw PreconditionError("distance bound needs trees of equal complexity");

    UpperBoundResult out;
    ReduceResult red1 = reduce_height(t1);
    SortResult sorted1 = sort_tree(red1.tree);
    ReduceResult red2 = reduce_height(t2);
    SortResult sorted2 = sort_tree(red2.tree);

    out.reduce_rounds_1 = red1.rounds;
    out.sort_rounds_1 = sorted1.rounds;
    out.reduce_rounds_2 = red2.rounds;
    out.sort_rounds_2 = sorted2.rounds;
    out.bound = 3 * (sorted1.rounds + sorted2.rounds) + red1.rounds + red2.rounds;

    out.script = pipeline_script(t1, red1, sorted1);
    MoveScript fwd2 = pipeline_script(t2, red2, sorted2);
    MoveScript back = invert_script(t2, fwd2);
    for (auto& b : back.blocks) out.script.blocks.push_back(std::move(b));
    return out;
}

} // namespace whitehead
