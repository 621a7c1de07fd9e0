#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tsm/grid.hpp"

using namespace tsm;

namespace {

PointSet random_set(const GridPtr& g, std::mt19937_64& rng, double p) {
    std::bernoulli_distribution coin(p);
    PointSet s(g);
    for (std::size_t i = 0; i < g->size(); ++i)
        if (coin(rng)) s.insert(i);
    return s;
}

}  // namespace

TEST(Grid, ShapeAndSpacing) {
    Grid g({0.0, -1.0}, {1.0, 1.0}, {11, 5});
    EXPECT_EQ(g.size(), 55u);
    EXPECT_DOUBLE_EQ(g.spacing(0), 0.1);
    EXPECT_DOUBLE_EQ(g.spacing(1), 0.5);
    EXPECT_DOUBLE_EQ(g.min_spacing(), 0.1);
    EXPECT_DOUBLE_EQ(g.covering_radius(), 0.5 * std::sqrt(0.01 + 0.25));
}

TEST(Grid, RejectsBadBoxes) {
    EXPECT_THROW(Grid({1.0}, {1.0}, {3}), ParameterError);
    EXPECT_THROW(Grid({0.0}, {1.0}, {0}), ParameterError);
    EXPECT_THROW(Grid({0.0, 0.0}, {1.0}, {3, 3}), UsageError);
}

TEST(Grid, LatticePointRoundTrip) {
    Grid g({0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}, {4, 5, 6});
    for (LatticeIndex i = 0; i < g.size(); ++i) EXPECT_EQ(g.index_of(g.point_of(i)), i);
}

TEST(Grid, RowMajorLastAxisFastest) {
    Grid g({0.0, 0.0}, {1.0, 1.0}, {3, 4});
    EXPECT_EQ(g.point_of(1), StateVector({0.0, 1.0 / 3.0}));
    EXPECT_EQ(g.point_of(4), StateVector({0.5, 0.0}));
}

TEST(Grid, MidpointOfOddAxisIsCentralIndex) {
    Grid g({0.0, 0.0}, {1.0, 1.0}, {5, 7});
    const auto c = g.coords_of(g.index_of({0.5, 0.5}));
    EXPECT_EQ(c[0], 2u);
    EXPECT_EQ(c[1], 3u);
}

TEST(Grid, NearestRounding) {
    Grid g({0.0, 0.0}, {1.0, 1.0}, {11, 11});
    const LatticeIndex i = g.index_of({0.3, 0.7});
    const double h = g.covering_radius();
    EXPECT_EQ(g.index_of({0.3 + 0.4 * h / std::sqrt(2.0), 0.7 - 0.4 * h / std::sqrt(2.0)}), i);
}

TEST(Grid, OutOfBoxIsDomainError) {
    Grid g({0.0}, {1.0}, {11});
    EXPECT_THROW(g.index_of({1.5}), DomainError);
    EXPECT_THROW(g.index_of({-0.01}), DomainError);
}

TEST(Grid, UnitCubeContainsClosedUpperFaces) {
    Grid g = Grid::unit_cube(3, 5);
    const LatticeIndex i = g.index_of({0.0, 1.0, 1.0});
    EXPECT_EQ(g.point_of(i), StateVector({0.0, 1.0, 1.0}));
}

TEST(GridProperty, CoveringRadius) {
    std::mt19937_64 rng(17);
    Grid g({0.0, 0.0, 0.0}, {1.0, 2.0, 0.5}, {7, 9, 4});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        StateVector x{u(rng), 2.0 * u(rng), 0.5 * u(rng)};
        worst = std::max(worst, distance(x, g.point_of(g.index_of(x))));
    }
    EXPECT_LE(worst, g.covering_radius());
}

TEST(BallQuery, RadiusZeroIsSingleton) {
    auto g = make_grid(Grid({0.0, 0.0}, {1.0, 1.0}, {6, 6}));
    const PointSet s = ball_query(g, g->point_of(14), 0.0);
    EXPECT_EQ(s.indices(), std::vector<LatticeIndex>({14}));
}

TEST(BallQuery, RadiusHAroundLatticePointIsSingleton) {
    auto g = make_grid(Grid({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {5, 5, 5}));
    const LatticeIndex c = g->index_from_coords({2, 2, 2});
    // h = sqrt(3)/2 * spacing is shorter than the spacing
    EXPECT_EQ(ball_query(g, g->point_of(c), g->covering_radius()).indices(), std::vector<LatticeIndex>({c}));
    // one full spacing reaches the six axis neighbours and nothing diagonal
    const PointSet s = ball_query(g, g->point_of(c), 0.25);
    EXPECT_EQ(s.count(), 7u);
    for (std::size_t axis = 0; axis < 3; ++axis)
        for (int d : {-1, 1}) {
            LatticeCoords k{2, 2, 2};
            k[axis] = static_cast<std::size_t>(2 + d);
            EXPECT_TRUE(s.contains(g->index_from_coords(k)));
        }
}

TEST(BallQuery, FiveByFiveExample) {
    auto g = make_grid(Grid({0.0, 0.0}, {4.0, 4.0}, {5, 5}));
    EXPECT_EQ(ball_query(g, {2.0, 2.0}, 1.5).count(), 9u);
}

TEST(BallQuery, CenterOutsideBox) {
    auto g = make_grid(Grid({0.0, 0.0}, {1.0, 1.0}, {3, 3}));
    EXPECT_TRUE(ball_query(g, {5.0, 5.0}, 1.0).empty());
    EXPECT_EQ(ball_query(g, {-0.4, 0.0}, 0.5).indices(), std::vector<LatticeIndex>({0}));
}

TEST(BallQuery, NegativeRadiusIsParameterError) {
    auto g = make_grid(Grid({0.0}, {1.0}, {3}));
    EXPECT_THROW(ball_query(g, {0.5}, -1e-9), ParameterError);
}

TEST(BallQueryProperty, MatchesBruteForce) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    std::uniform_real_distribution<double> r(0.0, 0.4);
    const std::vector<Grid> grids = {Grid({0.0, 0.0}, {1.0, 1.0}, {100, 100}),
                                     Grid({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {21, 21, 21}),
                                     Grid({0.0, 0.0, 0.0}, {1.0, 0.5, 2.0}, {10, 30, 17}),
                                     Grid({0.0}, {1.0}, {1000})};
    for (const auto& grid : grids) {
        auto g = make_grid(grid);
        for (int k = 0; k < 100; ++k) {
            StateVector c(g->dimension());
            for (double& v : c) v = u(rng);
            const double radius = r(rng);
            PointSet brute(g);
            for (LatticeIndex i = 0; i < g->size(); ++i)
                if (distance(g->point_of(i), c) <= radius) brute.insert(i);
            EXPECT_EQ(ball_query(g, c, radius), brute);
        }
    }
}

TEST(PointSet, AlgebraExamples) {
    auto g = make_grid(Grid({0.0}, {1.0}, {130}));
    std::mt19937_64 rng(23);
    const PointSet a = random_set(g, rng, 0.3);
    const PointSet empty(g);
    EXPECT_EQ(a | empty, a);
    EXPECT_TRUE((a - a).empty());
    EXPECT_EQ(a & a, a);
    EXPECT_EQ(a.complement().complement(), a);
    EXPECT_EQ(a.count() + a.complement().count(), g->size());
    EXPECT_EQ(PointSet::full(g).count(), 130u);
}

TEST(PointSetProperty, InclusionExclusion) {
    auto g = make_grid(Grid({0.0, 0.0}, {1.0, 1.0}, {37, 29}));
    std::mt19937_64 rng(29);
    for (int k = 0; k < 50; ++k) {
        const PointSet a = random_set(g, rng, 0.4), b = random_set(g, rng, 0.2);
        EXPECT_EQ((a | b).count(), a.count() + b.count() - (a & b).count());
        std::size_t recount = 0;
        for (LatticeIndex i = 0; i < g->size(); ++i) recount += (a.contains(i) || b.contains(i)) ? 1 : 0;
        EXPECT_EQ((a | b).count(), recount);
        EXPECT_TRUE((a & b).is_subset_of(a));
        EXPECT_EQ(a.intersects(b), !(a & b).empty());
    }
}

TEST(PointSet, MismatchedGridsAreUsageErrors) {
    auto g1 = make_grid(Grid({0.0}, {1.0}, {10}));
    auto g2 = make_grid(Grid({0.0}, {1.0}, {11}));
    PointSet a(g1), b(g2);
    EXPECT_THROW(a |= b, UsageError);
    EXPECT_THROW((void)(a & b), UsageError);
    EXPECT_THROW((void)(a - b), UsageError);
}

TEST(PointSet, SameGeometryDifferentObjectsCompatible) {
    auto g1 = make_grid(Grid({0.0}, {1.0}, {10}));
    auto g2 = make_grid(Grid({0.0}, {1.0}, {10}));
    PointSet a = PointSet::full(g1), b(g2);
    EXPECT_NO_THROW(a -= b);
}

TEST(Dilate, MatchesBruteForce) {
    auto g = make_grid(Grid({0.0, 0.0}, {1.0, 1.0}, {40, 40}));
    std::mt19937_64 rng(31);
    for (int k = 0; k < 10; ++k) {
        const PointSet seeds = random_set(g, rng, 0.01);
        const PointSet within = random_set(g, rng, 0.7);
        const double radius = 0.02 + 0.01 * k;
        PointSet brute(g);
        within.for_each([&](LatticeIndex i) {
            bool near = false;
            seeds.for_each([&](LatticeIndex j) { near = near || distance(g->point_of(i), g->point_of(j)) <= radius; });
            if (near) brute.insert(i);
        });
        EXPECT_EQ(dilate(seeds, radius, within, 1), brute);
        EXPECT_EQ(dilate(seeds, radius, within, 3), brute);
    }
}

TEST(LabelArray, AssignAndCompare) {
    auto g = make_grid(Grid({0.0}, {1.0}, {8}));
    LabelArray<int> labels(g, 0);
    PointSet s(g);
    s.insert(3);
    s.insert(5);
    labels.assign(s, 7);
    EXPECT_EQ(labels[3], 7);
    EXPECT_EQ(labels[4], 0);
    LabelArray<int> other(g, 0);
    EXPECT_FALSE(labels == other);
    other.assign(s, 7);
    EXPECT_TRUE(labels == other);
}
