#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>

#include "tsm/errors.hpp"

namespace tsm {

inline constexpr std::size_t kMaxDimension = 8;

// Point or tangent vector in a low-dimensional state space.  Fixed capacity
// so that right-hand side evaluations in the grid sweeps never allocate.
class StateVector {
public:
    StateVector() = default;

    explicit StateVector(std::size_t n, double fill = 0.0) : size_(n) {
        if (n > kMaxDimension) throw UsageError("state dimension exceeds kMaxDimension");
        std::fill_n(data_.begin(), n, fill);
    }

    StateVector(std::initializer_list<double> values) : size_(values.size()) {
        if (size_ > kMaxDimension) throw UsageError("state dimension exceeds kMaxDimension");
        std::copy(values.begin(), values.end(), data_.begin());
    }

    explicit StateVector(std::span<const double> values) : size_(values.size()) {
        if (size_ > kMaxDimension) throw UsageError("state dimension exceeds kMaxDimension");
        std::copy(values.begin(), values.end(), data_.begin());
    }

    std::size_t size() const noexcept { return size_; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    double* begin() noexcept { return data_.data(); }
    double* end() noexcept { return data_.data() + size_; }
    const double* begin() const noexcept { return data_.data(); }
    const double* end() const noexcept { return data_.data() + size_; }

    std::span<const double> view() const noexcept { return {data_.data(), size_}; }

    friend bool operator==(const StateVector& a, const StateVector& b) noexcept {
        return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
    }

    StateVector& operator+=(const StateVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < size_; ++i) data_[i] += o.data_[i];
        return *this;
    }
    StateVector& operator-=(const StateVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < size_; ++i) data_[i] -= o.data_[i];
        return *this;
    }
    StateVector& operator*=(double s) noexcept {
        for (std::size_t i = 0; i < size_; ++i) data_[i] *= s;
        return *this;
    }

    friend StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
    friend StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
    friend StateVector operator*(StateVector a, double s) noexcept { return a *= s; }
    friend StateVector operator*(double s, StateVector a) noexcept { return a *= s; }

    friend std::ostream& operator<<(std::ostream& os, const StateVector& v) {
        os << '(';
        for (std::size_t i = 0; i < v.size_; ++i) os << (i ? ", " : "") << v.data_[i];
        return os << ')';
    }

private:
    void check_same(const StateVector& o) const {
        if (o.size_ != size_) throw UsageError("state dimension mismatch");
    }

    std::array<double, kMaxDimension> data_{};
    std::size_t size_ = 0;
};

inline double norm(const StateVector& v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double distance(const StateVector& a, const StateVector& b) {
    return norm(a - b);
}

inline bool all_finite(const StateVector& v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace tsm
