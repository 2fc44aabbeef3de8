#include "whitehead/moves.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace whitehead {

namespace {

NodeStep to_node_step(const LabeledTree& t, const WhiteheadStep& s) {
    t.check_ref(s.edge);
    if (s.direction != 1 && s.direction != 2)
        throw PreconditionError("step direction must be 1 or 2");
    if (!t.is_interior(s.edge.node))
        throw PreconditionError("whitehead step needs an interior edge (got '" +
                                t.address_of(s.edge.node) + "')");
    auto [a, b] = t.children(s.edge.node);
    return {s.edge.node, s.direction == 1 ? a : b};
}

} // namespace

MoveResult apply_step(const LabeledTree& t, const WhiteheadStep& s) {
    NodeStep ns = to_node_step(t, s);
    MoveResult r{t};
    r.tree.apply_pull(ns.edge_node, ns.pull_node);
    return r;
}

void check_disjoint(const LabeledTree& t, const std::vector<NodeStep>& steps) {
    // The vertices of the edge at node v are {v, parent(v)}.
    std::unordered_set<int> touched;
    for (const NodeStep& s : steps) {
        int v = s.edge_node;
        int u = t.parent(v);
        if (!touched.insert(v).second || !touched.insert(u).second) {
            for (const NodeStep& o : steps) {
                if (&o == &s) break;
                int ov = o.edge_node, ou = t.parent(ov);
                if (ov == v || ov == u || ou == v || ou == u)
                    throw InvariantError("simultaneous move steps share a vertex: edges '" +
                                         t.address_of(ov) + "' and '" + t.address_of(v) + "'");
            }
            throw InvariantError("simultaneous move steps share a vertex at edge '" +
                                 t.address_of(v) + "'");
        }
    }
}

std::vector<NodeStep> apply_block_inplace(LabeledTree& t, const std::vector<NodeStep>& steps) {
    check_disjoint(t, steps);
    std::vector<NodeStep> inverse;
    inverse.reserve(steps.size());
    for (const NodeStep& s : steps) inverse.push_back(t.apply_pull(s.edge_node, s.pull_node));
    return inverse;
}

MoveResult apply_simultaneous(const LabeledTree& t, const SimultaneousMove& m) {
    std::vector<NodeStep> steps;
    steps.reserve(m.steps.size());
    for (const WhiteheadStep& s : m.steps) steps.push_back(to_node_step(t, s));
    MoveResult r{t};
    apply_block_inplace(r.tree, steps);
#ifndef NDEBUG
    // Disjoint steps commute exactly; spot-check one shuffled order.
    if (steps.size() > 1) {
        LabeledTree check = t;
        std::vector<NodeStep> rev(steps.rbegin(), steps.rend());
        for (const NodeStep& s : rev) check.apply_pull(s.edge_node, s.pull_node);
        if (!(check == r.tree))
            throw InvariantError("simultaneous move is order dependent");
    }
#endif
    return r;
}

std::vector<LabeledTree> neighbors_w(const LabeledTree& t) {
    std::vector<LabeledTree> out;
    std::set<std::string> seen;
    for (int v = 0; v < t.node_count(); ++v) {
        if (!t.is_interior(v)) continue;
        auto [a, b] = t.children(v);
        for (int pull : {a, b}) {
            LabeledTree next = t;
            next.apply_pull(v, pull);
            if (seen.insert(next.canonical()).second) out.push_back(std::move(next));
        }
    }
    return out;
}

std::vector<LabeledTree> neighbors_s(const LabeledTree& t, bool override_guard) {
    if (t.complexity() > 12 && !override_guard)
        throw GuardError("neighbors_s guarded to n <= 12 (independent-set count grows fast); "
                         "pass --guard-override to lift");
    std::vector<int> interior;
    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_interior(v)) interior.push_back(v);

    std::vector<LabeledTree> out;
    std::set<std::string> seen;
    std::vector<NodeStep> chosen;

    // conflict = edges share a vertex: equal, parent/child, or siblings
    auto conflicts = [&](int x, int y) {
        return x == y || t.parent(x) == y || t.parent(y) == x || t.parent(x) == t.parent(y);
    };

    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == interior.size()) {
            if (chosen.empty()) return;
            LabeledTree next = t;
            for (const NodeStep& s : chosen) next.apply_pull(s.edge_node, s.pull_node);
            if (seen.insert(next.canonical()).second) out.push_back(std::move(next));
            return;
        }
        rec(i + 1);  // skip edge i
        int v = interior[i];
        for (const NodeStep& s : chosen)
            if (conflicts(s.edge_node, v)) return;
        auto [a, b] = t.children(v);
        for (int pull : {a, b}) {
            chosen.push_back({v, pull});
            rec(i + 1);
            chosen.pop_back();
        }
    };
    rec(0);
    return out;
}

std::vector<MoveScript::Line> block_to_lines(const LabeledTree& t,
                                             const std::vector<NodeStep>& steps) {
    std::vector<MoveScript::Line> lines;
    lines.reserve(steps.size());
    for (const NodeStep& s : steps) {
        auto [a, b] = t.children(s.edge_node);
        MoveScript::Line line;
        line.address = t.address_of(s.edge_node);
        line.direction = (s.pull_node == a) ? 1 : 2;
        lines.push_back(std::move(line));
    }
    return lines;
}

std::string MoveScript::to_text() const {
    std::ostringstream os;
    for (const auto& block : blocks) {
        os << "sim{\n";
        for (const Line& line : block) os << line.address << ' ' << line.direction << '\n';
        os << "}\n";
    }
    return os.str();
}

MoveScript MoveScript::parse(std::string_view text) {
    MoveScript script;
    std::istringstream is{std::string(text)};
    std::string token;
    bool in_block = false;
    std::vector<Line> current;
    std::string word;
    std::istringstream line_stream;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        // strip comments and whitespace
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "sim{") {
            if (in_block) throw ParseError("nested sim{ block at line " + std::to_string(lineno));
            in_block = true;
            current.clear();
            continue;
        }
        if (first == "}") {
            if (!in_block) throw ParseError("unmatched } at line " + std::to_string(lineno));
            in_block = false;
            script.blocks.push_back(current);
            current.clear();
            continue;
        }
        Line line;
        line.address = (first == "*") ? "" : first;  // '*' denotes the root edge
        for (char c : line.address)
            if (c != 'a' && c != 'b')
                throw ParseError("bad edge address at line " + std::to_string(lineno));
        if (!(ls >> line.direction) || (line.direction != 1 && line.direction != 2))
            throw ParseError("bad direction at line " + std::to_string(lineno));
        std::string extra;
        if (ls >> extra) throw ParseError("trailing tokens at line " + std::to_string(lineno));
        if (in_block) current.push_back(line);
        else script.blocks.push_back({line});  // bare line = singleton move
    }
    if (in_block) throw ParseError("unterminated sim{ block");
    return script;
}

LabeledTree replay_script(const LabeledTree& t, const MoveScript& script) {
    LabeledTree cur = t;
    for (const auto& block : script.blocks) {
        // Resolve every address against the state at block start, then apply.
        std::vector<NodeStep> steps;
        steps.reserve(block.size());
        for (const MoveScript::Line& line : block) {
            int node = cur.resolve_address(line.address);
            if (!cur.is_interior(node))
                throw PreconditionError("script step at non-interior edge '" + line.address + "'");
            auto [a, b] = cur.children(node);
            steps.push_back({node, line.direction == 1 ? a : b});
        }
        apply_block_inplace(cur, steps);
    }
    return cur;
}

} // namespace whitehead
