#pragma once

// Brute-force reference implementations over explicitly materialized successor
// graphs.  Test-only and single-threaded; shares nothing with the viability
// and tsm modules except the node numbering.

#include <cstddef>
#include <deque>
#include <random>
#include <utility>
#include <vector>

#include "tsm/errors.hpp"

namespace tsm::oracle {

using NodeSet = std::vector<bool>;

// adjacency[node][control] = successor nodes.
struct SuccessorGraph {
    std::size_t nodes = 0;
    std::size_t controls = 0;
    std::vector<std::vector<std::vector<std::size_t>>> adjacency;

    SuccessorGraph() = default;
    SuccessorGraph(std::size_t n, std::size_t c)
        : nodes(n), controls(c), adjacency(n, std::vector<std::vector<std::size_t>>(c)) {}

    void add_edge(std::size_t from, std::size_t control, std::size_t to) {
        if (from >= nodes || to >= nodes || control >= controls) throw UsageError("edge out of range");
        adjacency[from][control].push_back(to);
    }
};

// Random graph with out-degree in [0, max_degree] per (node, control).
inline SuccessorGraph random_graph(std::size_t nodes, std::size_t controls, std::size_t max_degree,
                                   std::uint64_t seed) {
    SuccessorGraph g(nodes, controls);
    std::mt19937_64 rng(seed);
    for (std::size_t x = 0; x < nodes; ++x)
        for (std::size_t u = 0; u < controls; ++u) {
            const std::size_t deg = rng() % (max_degree + 1);
            for (std::size_t k = 0; k < deg; ++k) g.add_edge(x, u, rng() % nodes);
        }
    return g;
}

// Largest subset of `constraint` in which every node keeps, for some
// control, a successor inside the subset.  Worklist pruning: removing a node
// re-examines only its predecessors.
inline NodeSet oracle_kernel(const SuccessorGraph& g, const NodeSet& constraint) {
    NodeSet in = constraint;
    // live[x][u] = number of successors of (x, u) currently in the set
    std::vector<std::vector<std::size_t>> live(g.nodes, std::vector<std::size_t>(g.controls, 0));
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> preds(g.nodes);
    for (std::size_t x = 0; x < g.nodes; ++x)
        for (std::size_t u = 0; u < g.controls; ++u)
            for (std::size_t y : g.adjacency[x][u]) {
                preds[y].emplace_back(x, u);
                if (in[y]) ++live[x][u];
            }
    auto stuck = [&](std::size_t x) {
        for (std::size_t u = 0; u < g.controls; ++u)
            if (live[x][u] > 0) return false;
        return true;
    };
    std::deque<std::size_t> work;
    for (std::size_t x = 0; x < g.nodes; ++x)
        if (in[x]) work.push_back(x);
    while (!work.empty()) {
        const std::size_t x = work.front();
        work.pop_front();
        if (!in[x] || !stuck(x)) continue;
        in[x] = false;
        for (auto [p, u] : preds[x]) {
            --live[p][u];
            if (in[p]) work.push_back(p);
        }
    }
    return in;
}

// Nodes with a control path into `target` whose intermediate nodes all lie
// in `constraint`.  Reverse breadth-first search from the target.
inline NodeSet oracle_basin(const SuccessorGraph& g, const NodeSet& target, const NodeSet& constraint) {
    std::vector<std::vector<std::size_t>> preds(g.nodes);
    for (std::size_t x = 0; x < g.nodes; ++x)
        for (std::size_t u = 0; u < g.controls; ++u)
            for (std::size_t y : g.adjacency[x][u]) preds[y].push_back(x);
    NodeSet reached = target;
    std::deque<std::size_t> queue;
    for (std::size_t x = 0; x < g.nodes; ++x)
        if (target[x]) queue.push_back(x);
    while (!queue.empty()) {
        const std::size_t y = queue.front();
        queue.pop_front();
        for (std::size_t p : preds[y])
            if (!reached[p] && constraint[p]) {
                reached[p] = true;
                queue.push_back(p);
            }
    }
    return reached;
}

inline NodeSet oracle_basin(const SuccessorGraph& g, const NodeSet& target) {
    return oracle_basin(g, target, NodeSet(g.nodes, true));
}

// Alternating reachability until both sets stop changing.
inline std::pair<NodeSet, NodeSet> oracle_eddies(const SuccessorGraph& g, NodeSet plus, NodeSet minus) {
    for (std::size_t x = 0; x < g.nodes; ++x)
        if (plus[x] && minus[x]) throw UsageError("eddy candidate sets must be disjoint");
    while (true) {
        const NodeSet reach_plus = oracle_basin(g, plus);
        NodeSet new_minus(g.nodes, false);
        for (std::size_t x = 0; x < g.nodes; ++x) new_minus[x] = minus[x] && reach_plus[x];
        const NodeSet reach_minus = oracle_basin(g, new_minus);
        NodeSet new_plus(g.nodes, false);
        for (std::size_t x = 0; x < g.nodes; ++x) new_plus[x] = plus[x] && reach_minus[x];
        if (new_plus == plus && new_minus == minus) return {plus, minus};
        plus = std::move(new_plus);
        minus = std::move(new_minus);
    }
}

}  // namespace tsm::oracle
