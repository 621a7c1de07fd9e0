#pragma once

// Regular lattice over an axis-aligned box, dense bitmap point sets and label
// arrays over it.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tsm/errors.hpp"
#include "tsm/parallel.hpp"
#include "tsm/state.hpp"

namespace tsm {

using LatticeIndex = std::size_t;
using LatticeCoords = std::array<std::size_t, kMaxDimension>;

// Lattice points include both ends of every axis (an axis with a single point
// carries it at the box centre).  Indices are row-major with the last axis
// running fastest.
class Grid {
public:
    Grid(StateVector lower, StateVector upper, std::vector<std::size_t> points_per_axis)
        : lower_(std::move(lower)), upper_(std::move(upper)), points_(std::move(points_per_axis)) {
        const std::size_t n = lower_.size();
        if (n == 0 || n > kMaxDimension) throw UsageError("grid dimension must be in [1, kMaxDimension]");
        if (upper_.size() != n || points_.size() != n) throw UsageError("grid corner/resolution dimension mismatch");
        size_ = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
                throw ParameterError("grid box must satisfy lower < upper on every axis");
            if (points_[i] == 0) throw ParameterError("points per axis must be positive");
            const double width = upper_[i] - lower_[i];
            spacing_[i] = points_[i] > 1 ? width / static_cast<double>(points_[i] - 1) : width;
            size_ *= points_[i];
        }
        std::size_t stride = 1;
        for (std::size_t i = n; i-- > 0;) {
            stride_[i] = stride;
            stride *= points_[i];
        }
        double h2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) h2 += 0.25 * spacing_[i] * spacing_[i];
        covering_radius_ = std::sqrt(h2);
    }

    static Grid unit_cube(std::size_t dimension, std::size_t points_per_axis) {
        return Grid(StateVector(dimension, 0.0), StateVector(dimension, 1.0),
                    std::vector<std::size_t>(dimension, points_per_axis));
    }

    std::size_t dimension() const noexcept { return lower_.size(); }
    std::size_t size() const noexcept { return size_; }
    const StateVector& lower() const noexcept { return lower_; }
    const StateVector& upper() const noexcept { return upper_; }
    const std::vector<std::size_t>& points_per_axis() const noexcept { return points_; }
    double spacing(std::size_t axis) const noexcept { return spacing_[axis]; }
    double min_spacing() const noexcept {
        return *std::min_element(spacing_.begin(), spacing_.begin() + dimension());
    }

    // Every point of the box lies within this distance of a lattice point.
    double covering_radius() const noexcept { return covering_radius_; }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.lower_ == b.lower_ && a.upper_ == b.upper_ && a.points_ == b.points_;
    }

    double axis_coordinate(std::size_t axis, std::size_t k) const noexcept {
        if (points_[axis] == 1) return 0.5 * (lower_[axis] + upper_[axis]);
        const double t = static_cast<double>(k) / static_cast<double>(points_[axis] - 1);
        return lower_[axis] + (upper_[axis] - lower_[axis]) * t;
    }

    LatticeCoords coords_of(LatticeIndex index) const noexcept {
        LatticeCoords c{};
        for (std::size_t i = 0; i < dimension(); ++i) {
            c[i] = index / stride_[i];
            index %= stride_[i];
        }
        return c;
    }

    LatticeIndex index_from_coords(const LatticeCoords& c) const noexcept {
        LatticeIndex idx = 0;
        for (std::size_t i = 0; i < dimension(); ++i) idx += c[i] * stride_[i];
        return idx;
    }

    StateVector point_of(LatticeIndex index) const {
        if (index >= size_) throw UsageError("lattice index out of range");
        const auto c = coords_of(index);
        StateVector x(dimension());
        for (std::size_t i = 0; i < dimension(); ++i) x[i] = axis_coordinate(i, c[i]);
        return x;
    }

    bool contains(const StateVector& x, double tolerance = 1e-12) const noexcept {
        if (x.size() != dimension()) return false;
        for (std::size_t i = 0; i < dimension(); ++i) {
            const double slack = tolerance * (upper_[i] - lower_[i]);
            if (!(x[i] >= lower_[i] - slack && x[i] <= upper_[i] + slack)) return false;
        }
        return true;
    }

    // Nearest lattice point.
    LatticeIndex index_of(const StateVector& x) const {
        if (x.size() != dimension()) throw UsageError("index_of: dimension mismatch");
        if (!contains(x)) throw DomainError("index_of: point outside the grid box");
        LatticeCoords c{};
        for (std::size_t i = 0; i < dimension(); ++i) {
            if (points_[i] == 1) continue;
            const double k = std::round((x[i] - lower_[i]) / spacing_[i]);
            c[i] = static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(points_[i] - 1)));
        }
        return index_from_coords(c);
    }

    // Calls fn(index) for every lattice point within Euclidean distance
    // `radius` of `center`, stopping early when fn returns true.  Returns
    // whether any call returned true.  `center` may lie outside the box.
    template <class Fn>
    bool any_in_ball(const StateVector& center, double radius, Fn&& fn) const {
        const std::size_t n = dimension();
        std::array<std::size_t, kMaxDimension> lo{}, hi{};
        // Squared per-axis offsets are tabulated so the inner loop only adds.
        std::array<std::array<double, 64>, kMaxDimension> d2{};
        std::array<bool, kMaxDimension> tabulated{};
        for (std::size_t i = 0; i < n; ++i) {
            double a, b;
            if (points_[i] == 1) {
                a = b = 0.0;
            } else {
                a = std::ceil((center[i] - radius - lower_[i]) / spacing_[i] - 1e-9);
                b = std::floor((center[i] + radius - lower_[i]) / spacing_[i] + 1e-9);
                a = std::max(a, 0.0);
                b = std::min(b, static_cast<double>(points_[i] - 1));
            }
            if (!(a <= b)) return false;
            lo[i] = static_cast<std::size_t>(a);
            hi[i] = static_cast<std::size_t>(b);
            tabulated[i] = hi[i] - lo[i] < 64;
            if (tabulated[i])
                for (std::size_t k = lo[i]; k <= hi[i]; ++k) {
                    const double d = axis_coordinate(i, k) - center[i];
                    d2[i][k - lo[i]] = d * d;
                }
        }
        const double r2 = radius * radius;
        auto axis_d2 = [&](std::size_t i, std::size_t k) {
            if (tabulated[i]) return d2[i][k - lo[i]];
            const double d = axis_coordinate(i, k) - center[i];
            return d * d;
        };
        LatticeCoords c{};
        for (std::size_t i = 0; i < n; ++i) c[i] = lo[i];
        while (true) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += axis_d2(i, c[i]);
            if (s <= r2 && fn(index_from_coords(c))) return true;
            std::size_t axis = n;
            while (axis-- > 0) {
                if (c[axis] < hi[axis]) {
                    ++c[axis];
                    break;
                }
                c[axis] = lo[axis];
            }
            if (axis == static_cast<std::size_t>(-1)) return false;
        }
    }

    // Lattice offsets (as signed coordinate deltas) within `radius` of a
    // lattice point, ignoring the box.
    std::vector<std::array<long, kMaxDimension>> stencil(double radius) const {
        const std::size_t n = dimension();
        std::array<long, kMaxDimension> reach{};
        for (std::size_t i = 0; i < n; ++i)
            reach[i] = points_[i] == 1 ? 0 : static_cast<long>(std::floor(radius / spacing_[i] + 1e-9));
        std::vector<std::array<long, kMaxDimension>> out;
        std::array<long, kMaxDimension> d{};
        for (std::size_t i = 0; i < n; ++i) d[i] = -reach[i];
        while (true) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += (d[i] * spacing_[i]) * (d[i] * spacing_[i]);
            if (s <= radius * radius * (1.0 + 1e-12)) out.push_back(d);
            std::size_t axis = n;
            while (axis-- > 0) {
                if (d[axis] < reach[axis]) {
                    ++d[axis];
                    break;
                }
                d[axis] = -reach[axis];
            }
            if (axis == static_cast<std::size_t>(-1)) break;
        }
        return out;
    }

private:
    StateVector lower_, upper_;
    std::vector<std::size_t> points_;
    std::array<double, kMaxDimension> spacing_{};
    std::array<std::size_t, kMaxDimension> stride_{};
    std::size_t size_ = 0;
    double covering_radius_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(Grid grid) { return std::make_shared<const Grid>(std::move(grid)); }

// Subset of a grid's lattice points as a dense bitmap.
class PointSet {
public:
    explicit PointSet(GridPtr grid) : grid_(std::move(grid)) {
        if (!grid_) throw UsageError("PointSet needs a grid");
        words_.assign((grid_->size() + 63) / 64, 0);
    }

    static PointSet full(GridPtr grid) {
        PointSet s(std::move(grid));
        std::fill(s.words_.begin(), s.words_.end(), ~std::uint64_t{0});
        s.trim();
        return s;
    }

    template <class Pred>
    static PointSet from_predicate(GridPtr grid, Pred&& pred) {
        PointSet s(std::move(grid));
        for (LatticeIndex i = 0; i < s.grid_->size(); ++i)
            if (pred(s.grid_->point_of(i))) s.insert(i);
        return s;
    }

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t universe() const noexcept { return grid_->size(); }

    bool contains(LatticeIndex i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void insert(LatticeIndex i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void erase(LatticeIndex i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    std::size_t count() const noexcept {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool empty() const noexcept {
        return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
    }

    PointSet& operator|=(const PointSet& o) {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    PointSet& operator&=(const PointSet& o) {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    PointSet& operator-=(const PointSet& o) {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }
    friend PointSet operator|(PointSet a, const PointSet& b) { return a |= b; }
    friend PointSet operator&(PointSet a, const PointSet& b) { return a &= b; }
    friend PointSet operator-(PointSet a, const PointSet& b) { return a -= b; }

    PointSet complement() const {
        PointSet s(grid_);
        for (std::size_t i = 0; i < words_.size(); ++i) s.words_[i] = ~words_[i];
        s.trim();
        return s;
    }

    bool is_subset_of(const PointSet& o) const {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }
    bool intersects(const PointSet& o) const {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & o.words_[i]) return true;
        return false;
    }

    friend bool operator==(const PointSet& a, const PointSet& b) {
        return *a.grid_ == *b.grid_ && a.words_ == b.words_;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for_each_in(0, universe(), fn);
    }

    // Members with index in [begin, end).
    template <class Fn>
    void for_each_in(LatticeIndex begin, LatticeIndex end, Fn&& fn) const {
        if (begin >= end) return;
        for (std::size_t w = begin >> 6; w <= (end - 1) >> 6; ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const LatticeIndex i = (w << 6) + static_cast<std::size_t>(std::countr_zero(bits));
                bits &= bits - 1;
                if (i >= begin && i < end) fn(i);
            }
        }
    }

    std::vector<LatticeIndex> indices() const {
        std::vector<LatticeIndex> out;
        out.reserve(count());
        for_each([&](LatticeIndex i) { out.push_back(i); });
        return out;
    }

    std::vector<std::uint64_t>& words() noexcept { return words_; }
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

private:
    void check_same(const PointSet& o) const {
        if (grid_ != o.grid_ && !(*grid_ == *o.grid_))
            throw UsageError("set operation on point sets over different grids");
    }
    void trim() noexcept {
        const std::size_t rem = grid_->size() & 63;
        if (rem && !words_.empty()) words_.back() &= (std::uint64_t{1} << rem) - 1;
    }

    GridPtr grid_;
    std::vector<std::uint64_t> words_;
};

// All lattice points within `radius` of `center`.
inline PointSet ball_query(const GridPtr& grid, const StateVector& center, double radius) {
    if (!(radius >= 0.0)) throw ParameterError("ball radius must be nonnegative");
    if (center.size() != grid->dimension()) throw UsageError("ball_query: dimension mismatch");
    PointSet out(grid);
    grid->any_in_ball(center, radius, [&](LatticeIndex i) {
        out.insert(i);
        return false;
    });
    return out;
}

// Points of `within` that lie within `radius` of some member of `seeds`.
inline PointSet dilate(const PointSet& seeds, double radius, const PointSet& within, unsigned workers = 1) {
    const Grid& g = seeds.grid();
    const auto offsets = g.stencil(radius);
    const std::size_t n = g.dimension();
    std::vector<PointSet> partial(std::max(1u, workers), PointSet(seeds.grid_ptr()));
    parallel_for(g.size(), workers, [&](std::size_t begin, std::size_t end, unsigned w) {
        PointSet& out = partial[w];
        seeds.for_each_in(begin, end, [&](LatticeIndex i) {
            const auto c = g.coords_of(i);
            for (const auto& d : offsets) {
                LatticeCoords t{};
                bool inside = true;
                for (std::size_t k = 0; k < n; ++k) {
                    const long v = static_cast<long>(c[k]) + d[k];
                    if (v < 0 || v >= static_cast<long>(g.points_per_axis()[k])) {
                        inside = false;
                        break;
                    }
                    t[k] = static_cast<std::size_t>(v);
                }
                if (inside) out.insert(g.index_from_coords(t));
            }
        });
    });
    PointSet merged = partial[0];
    for (std::size_t w = 1; w < partial.size(); ++w) merged |= partial[w];
    return merged & within;
}

// One label per lattice point.
template <class Label>
class LabelArray {
public:
    LabelArray(GridPtr grid, Label fill) : grid_(std::move(grid)), labels_(grid_->size(), fill) {}

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t size() const noexcept { return labels_.size(); }
    Label operator[](LatticeIndex i) const noexcept { return labels_[i]; }
    Label& operator[](LatticeIndex i) noexcept { return labels_[i]; }
    const std::vector<Label>& values() const noexcept { return labels_; }

    void assign(const PointSet& set, Label label) {
        if (!(set.grid() == *grid_)) throw UsageError("label assignment over a different grid");
        set.for_each([&](LatticeIndex i) { labels_[i] = label; });
    }

    friend bool operator==(const LabelArray& a, const LabelArray& b) {
        return *a.grid_ == *b.grid_ && a.labels_ == b.labels_;
    }

private:
    GridPtr grid_;
    std::vector<Label> labels_;
};

}  // namespace tsm
