#pragma once

// Random systems on small grids and their explicit successor graphs, shared by
// the viability, oracle and tsm tests.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "tsm/grid.hpp"
#include "tsm/oracle.hpp"
#include "tsm/system.hpp"
#include "tsm/viability.hpp"

namespace tsm::testing {

// Vector field that is constant on the cell of each lattice point, drawn at
// random with |v| <= 1.  `drift` is added before normalizing, to bias flows.
inline ControlledSystem random_cell_system(const GridPtr& grid, std::size_t controls, std::uint64_t seed,
                                           double drift = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    const std::size_t n = grid->dimension();
    auto table = std::make_shared<std::vector<StateVector>>();
    for (std::size_t i = 0; i < grid->size() * controls; ++i) {
        StateVector v(n);
        for (double& c : v) c = gauss(rng);
        v[0] += drift;
        const double len = norm(v);
        v *= len > 0 ? mag(rng) / len : 0.0;
        table->push_back(v);
    }
    std::vector<std::string> names;
    for (std::size_t u = 0; u < controls; ++u) names.push_back("u" + std::to_string(u));
    ControlledSystem sys(n, names, 0, [grid, table, controls](const StateVector& x, ControlIndex u) {
        return (*table)[grid->index_of(x) * controls + u];
    });
    sys.set_norm_bound(1.0);
    return sys;
}

// Successor graph by direct distance filtering over all lattice points.
inline oracle::SuccessorGraph materialize(const DiscreteDynamics& dyn) {
    const Grid& g = dyn.grid();
    const std::size_t controls = dyn.system().control_count();
    oracle::SuccessorGraph graph(g.size(), controls);
    for (LatticeIndex x = 0; x < g.size(); ++x)
        for (ControlIndex u = 0; u < controls; ++u) {
            const StateVector p = g.point_of(x);
            const StateVector c = p + dyn.system()(p, u) * dyn.config().dt;
            for (LatticeIndex y = 0; y < g.size(); ++y)
                if (distance(g.point_of(y), c) <= dyn.config().radius) graph.add_edge(x, u, y);
        }
    return graph;
}

inline oracle::NodeSet to_nodes(const PointSet& s) {
    oracle::NodeSet out(s.universe(), false);
    s.for_each([&](LatticeIndex i) { out[i] = true; });
    return out;
}

inline PointSet random_points(const GridPtr& g, std::mt19937_64& rng, double p) {
    std::bernoulli_distribution coin(p);
    PointSet s(g);
    for (std::size_t i = 0; i < g->size(); ++i)
        if (coin(rng)) s.insert(i);
    return s;
}

// Union of a few random balls: spatially coherent sets, closer to the
// kernels and targets met in practice than independent coin flips.
inline PointSet random_blobs(const GridPtr& g, std::mt19937_64& rng, int count, double max_radius) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointSet s(g);
    for (int k = 0; k < count; ++k) {
        StateVector c(g->dimension());
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = g->lower()[i] + unit(rng) * (g->upper()[i] - g->lower()[i]);
        s |= ball_query(g, c, max_radius * unit(rng));
    }
    return s;
}

}  // namespace tsm::testing
