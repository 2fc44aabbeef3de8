#ifndef WHITEHEAD_REBALANCE_HPP
#define WHITEHEAD_REBALANCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "whitehead/moves.hpp"
#include "whitehead/tree.hpp"

namespace whitehead {

/// Outcome of inspecting one edge for a balance move: either no move, or
/// the Whitehead step at the child on the strictly largest grandchild side
/// that pulls that grandchild up.
struct BalanceDecision {
    EdgeRef edge;
    std::optional<NodeStep> step;
};

/// Compare the four grandchild subtree sizes of `e` (missing grandchildren
/// count as 0). A strict unique maximum yields a step; any tie yields none.
BalanceDecision balance_move(const LabeledTree& t, EdgeRef e);

struct BalanceRound {
    LabeledTree tree;
    int steps_fired = 0;
};

/// One simultaneous move made of the balance decisions at every edge of odd
/// height. The collected steps are checked pairwise vertex-disjoint.
BalanceRound balance_round(const LabeledTree& t);

struct ReduceTraceRow {
    int round = 0;
    int height = 0;       // height after this round
    int steps_fired = 0;
};

struct ReduceResult {
    LabeledTree tree;
    int rounds = 0;
    std::vector<ReduceTraceRow> trace;
    MoveScript script;

    std::string trace_csv() const;  // round,height,steps_fired
};

/// Ceiling of log base 6/5 of (n+1); the round budget.
int reduce_round_budget(int n);

/// 6*log2(n); heights strictly above this are "too tall".
double height_threshold(int n);

/// Repeat balance rounds while height(t) > 6*log2(n). Checks per round that
/// every edge that was above the threshold contracted by the 5/6 factor and
/// that the round budget holds; violations throw InvariantError.
ReduceResult reduce_height(const LabeledTree& t);

} // namespace whitehead

#endif
