#ifndef WHITEHEAD_SORT_HPP
#define WHITEHEAD_SORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "whitehead/moves.hpp"
#include "whitehead/tree.hpp"

namespace whitehead {

/// The canonical fully-sorted tree T_n: left subtree a full tree on the
/// labels 0..2^m-1, right subtree T_{n-2^m} shifted by 2^m, recursively.
LabeledTree build_tn(int n);

/// Digit machinery over the labels of one tree: d is the number of binary
/// digits of n (1 for n <= 1); digit k of a label is the k-th bit from the
/// right, k = 1..d, and digit d+1 is read as 0.
struct DigitView {
    int n = 0;
    int d = 1;
    explicit DigitView(int complexity) : n(complexity), d(digit_count(complexity)) {}
    int digit(int label, int k) const { return (label >> (k - 1)) & 1; }
};

/// Per-edge digit scan used by the sorter; arrays are indexed by node id.
struct SortScan {
    std::vector<unsigned> and_mask, or_mask;
    std::vector<int> sortedness;   // minimal k with the edge k-sorted
    std::vector<int> presorted;    // the unique pre-sorted level, or 0
    std::vector<char> ripe;        // T_e ripe
    int d = 1;

    bool fully_sorted(const LabeledTree& t) const;
    long long level_sum() const;   // termination measure
};

SortScan scan(const LabeledTree& t);

/// Minimal k such that edge e is k-sorted (1..d+1).
int sortedness(const LabeledTree& t, EdgeRef e);

/// Every edge d_e-sorted; equivalent to t == build_tn(n).
bool is_fully_sorted(const LabeledTree& t);

/// The level k at which e is pre-sorted (children k-sorted, digits above k
/// shared, e itself not k-sorted), if any. Defined for edges with children.
std::optional<int> presorted_level(const LabeledTree& t, EdgeRef e);

/// T_e ripe: below e, every edge's children are one level further sorted or
/// pre-sorted at that level; leaf children pass.
bool is_ripe(const LabeledTree& t, EdgeRef e);

/// The move sequence that makes one pre-sorted edge k-sorted. Type 1 swaps
/// the mismatched blocks of two mixed children in three steps; types 2 and
/// 3 regroup a single mixed child around a pure sibling in one step.
struct SortMovePlan {
    EdgeRef edge;
    int level = 0;          // k
    int type = 0;           // 1, 2 or 3
    std::vector<NodeStep> steps;  // 3 steps for type 1, 1 step otherwise
};

SortMovePlan plan_sort_move(const LabeledTree& t, EdgeRef e, int k);

struct SortTraceRow {
    int round = 0;
    int phase = 0;
    int steps = 0;
    int max_unsorted_level = 0;
    int height = 0;
};

/// One simultaneous sort move: plans for every pre-sorted edge with a ripe
/// subtree, executed as three phase-wise simultaneous Whitehead moves.
struct SortRound {
    LabeledTree tree;
    int selected_edges = 0;
    int phases_applied = 0;       // nonempty phases (simultaneous moves used)
    std::vector<SortTraceRow> trace;
    std::vector<std::vector<MoveScript::Line>> script_blocks;
};

SortRound sort_round(const LabeledTree& t, int round_index = 1);

struct SortResult {
    LabeledTree tree;
    int rounds = 0;
    int sim_moves = 0;            // nonempty phases across all rounds
    std::vector<SortTraceRow> trace;
    MoveScript script;

    std::string trace_csv() const;  // round,phase,steps,max_unsorted_level,height
};

/// Number of sort rounds allowed for a tree of height h and digit count d:
/// (h-3) + d + 2, never below 1.
int sort_round_budget(int height, int d);

/// Run sort rounds until fully sorted. Requires height(t) <= 6 log2(n) for
/// n >= 2 (run reduce_height first); returns immediately for n <= 1.
SortResult sort_tree(const LabeledTree& t);

struct UpperBoundResult {
    int bound = 0;
    MoveScript script;   // replays t1 exactly onto t2
    int reduce_rounds_1 = 0, sort_rounds_1 = 0;
    int reduce_rounds_2 = 0, sort_rounds_2 = 0;
};

/// Constructive upper bound for d_S(t1, t2) through T_n:
/// 3*(sort rounds of both) + reduce rounds of both.
UpperBoundResult distance_upper(const LabeledTree& t1, const LabeledTree& t2);

} // namespace whitehead

#endif
