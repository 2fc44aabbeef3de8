#ifndef WHITEHEAD_MOVES_HPP
#define WHITEHEAD_MOVES_HPP

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "whitehead/tree.hpp"

namespace whitehead {

/// A Whitehead step on a tree: an interior edge plus a direction. Direction
/// 1 pulls the canonical-first child of the edge's node up beside its
/// parent, direction 2 the canonical-second child; the former sibling
/// regroups with the remaining child. Directions are resolved against
/// canonical child order at application time.
struct WhiteheadStep {
    EdgeRef edge;
    int direction = 1;  // 1 = pull-first, 2 = pull-second
};

/// A set of steps on pairwise vertex-disjoint edges, applied atomically.
struct SimultaneousMove {
    std::vector<WhiteheadStep> steps;
};

struct MoveResult {
    LabeledTree tree;
    /// Node ids survive every step, so a ref from the input tree translates
    /// to the same node at the new version.
    EdgeRef translate(EdgeRef old) const { return {old.node, tree.version()}; }
};

/// Apply one step. Throws PreconditionError for a non-interior edge and
/// StaleEdgeError for a ref from another version.
MoveResult apply_step(const LabeledTree& t, const WhiteheadStep& s);

/// Check that the step edges are pairwise disjoint (no shared vertex: not
/// equal, not parent/child, not siblings). Throws InvariantError naming the
/// offending pair if not.
void check_disjoint(const LabeledTree& t, const std::vector<NodeStep>& steps);

/// Apply a simultaneous move; equals sequential application in any order.
MoveResult apply_simultaneous(const LabeledTree& t, const SimultaneousMove& m);

/// Internal-form appliers used by the algorithm engines. The returned
/// inverse block undoes the move when applied to the resulting tree.
std::vector<NodeStep> apply_block_inplace(LabeledTree& t, const std::vector<NodeStep>& steps);

/// All trees one Whitehead step away, deduplicated by canonical form.
std::vector<LabeledTree> neighbors_w(const LabeledTree& t);

/// All trees one simultaneous move away (every nonempty independent set of
/// interior edges, every choice of directions). Guarded to n <= 12 unless
/// `override_guard`.
std::vector<LabeledTree> neighbors_s(const LabeledTree& t, bool override_guard = false);

/// Replayable move script: a list of simultaneous blocks, each a list of
/// (edge address, direction) lines. Addresses within a block are resolved
/// against the tree state at the start of the block.
struct MoveScript {
    struct Line {
        std::string address;
        int direction = 1;
    };
    std::vector<std::vector<Line>> blocks;

    std::string to_text() const;
    static MoveScript parse(std::string_view text);
    bool empty() const { return blocks.empty(); }
    std::size_t move_count() const { return blocks.size(); }
};

LabeledTree replay_script(const LabeledTree& t, const MoveScript& script);

/// Script-form of one engine block against the current tree state; call
/// before applying the block.
std::vector<MoveScript::Line> block_to_lines(const LabeledTree& t, const std::vector<NodeStep>& steps);

} // namespace whitehead

#endif
