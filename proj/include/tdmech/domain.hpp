#pragma once

#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "tdmech/errors.hpp"

namespace tdmech {

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

/// Axis-aligned open box. Charts, field domains and transition overlaps are
/// all declared this way; membership tests are the only precondition checks
/// the kernel performs.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<Interval> intervals) : iv_(std::move(intervals)) {}

    static Box cube(std::size_t dim, double lo, double hi) {
        return Box(std::vector<Interval>(dim, Interval{lo, hi}));
    }
    static Box unbounded(std::size_t dim) {
        return Box(std::vector<Interval>(dim, Interval{}));
    }

    std::size_t dim() const { return iv_.size(); }
    const Interval& operator[](std::size_t i) const { return iv_[i]; }
    Interval& operator[](std::size_t i) { return iv_[i]; }

    /// Strict open-box membership, widened by `margin` on each side.
    bool contains(std::span<const double> p, double margin = 0.0) const {
        if (p.size() != iv_.size()) return false;
        for (std::size_t i = 0; i < iv_.size(); ++i)
            if (!(p[i] > iv_[i].lo - margin && p[i] < iv_[i].hi + margin)) return false;
        return true;
    }

    void require_inside(std::span<const double> p, double margin = 0.0) const {
        for (std::size_t i = 0; i < iv_.size() && i < p.size(); ++i) {
            if (!(p[i] > iv_[i].lo - margin && p[i] < iv_[i].hi + margin)) {
                std::ostringstream os;
                os << "coordinate " << i << " = " << p[i] << " outside open box ("
                   << iv_[i].lo << ", " << iv_[i].hi << ")";
                throw DomainError(os.str(), static_cast<int>(i), p[i], iv_[i].lo, iv_[i].hi);
            }
        }
        if (p.size() != iv_.size())
            throw ValidationError("point dimension does not match box dimension");
    }

    /// Center point; unbounded axes map to 0.
    std::vector<double> center() const {
        std::vector<double> c(iv_.size());
        for (std::size_t i = 0; i < iv_.size(); ++i) {
            bool lof = std::isfinite(iv_[i].lo), hif = std::isfinite(iv_[i].hi);
            c[i] = (lof && hif) ? 0.5 * (iv_[i].lo + iv_[i].hi) : (lof ? iv_[i].lo + 1.0 : (hif ? iv_[i].hi - 1.0 : 0.0));
        }
        return c;
    }

private:
    std::vector<Interval> iv_;
};

/// Domain over (t, x, y) with x and y of dimension n: a box in 1 + 2n slots.
inline Box phase_box(Interval t, const Box& x, const Box& y) {
    std::vector<Interval> iv;
    iv.reserve(1 + x.dim() + y.dim());
    iv.push_back(t);
    for (std::size_t i = 0; i < x.dim(); ++i) iv.push_back(x[i]);
    for (std::size_t i = 0; i < y.dim(); ++i) iv.push_back(y[i]);
    return Box(std::move(iv));
}

}  // namespace tdmech
