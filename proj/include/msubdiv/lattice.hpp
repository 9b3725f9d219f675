#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msubdiv/matrix.hpp"
#include "msubdiv/rational.hpp"

namespace msubdiv {

using Coord = long long;
using Point = std::vector<Coord>; // lexicographic order = std::vector's operator<

inline Point point_add(const Point& a, const Point& b) {
    Point r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Point point_sub(const Point& a, const Point& b) {
    Point r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Point point_neg(const Point& a) {
    Point r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

inline Coord l1_distance(const Point& a, const Point& b) {
    Coord d = 0;
    for (size_t i = 0; i < a.size(); ++i) d += std::llabs(a[i] - b[i]);
    return d;
}

inline double l2_norm(const Point& a) {
    double s = 0;
    for (Coord c : a) s += double(c) * double(c);
    return std::sqrt(s);
}

inline std::string point_str(const Point& p) {
    std::string s = "(";
    for (size_t i = 0; i < p.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(p[i]);
    }
    return s + ")";
}

/// Square integer matrix with cached exact determinant and rational inverse.
class IntMatrix {
public:
    IntMatrix() : n_(0), det_(0) {}
    IntMatrix(int n, std::vector<Coord> entries) : n_(n), a_(std::move(entries)) {
        if (n < 1) throw std::invalid_argument("IntMatrix: dimension must be >= 1");
        if (int(a_.size()) != n * n) throw std::invalid_argument("IntMatrix: entry count mismatch");
        det_ = bareiss_det();
        if (det_ != 0) inv_ = RatMatrix::solve(to_rational(), RatMatrix::identity(n_));
    }

    static IntMatrix scalar(Coord m) { return IntMatrix(1, {m}); }

    int dim() const { return n_; }
    Coord det() const { return det_; }
    bool invertible() const { return det_ != 0; }
    Coord operator()(int i, int j) const { return a_[size_t(i) * n_ + j]; }

    const RatMatrix& inverse() const {
        if (!inv_) throw std::domain_error("IntMatrix: singular matrix has no inverse");
        return *inv_;
    }

    Point apply(const Point& p) const {
        if (int(p.size()) != n_) throw std::invalid_argument("IntMatrix: point dimension mismatch");
        Point r(n_, 0);
        for (int i = 0; i < n_; ++i) {
            Int128 acc = 0;
            for (int j = 0; j < n_; ++j) acc += Int128((*this)(i, j)) * p[j];
            if (acc > Int128(1) << 62 || acc < -(Int128(1) << 62))
                throw std::overflow_error("IntMatrix: coordinate overflow");
            r[i] = Coord(acc);
        }
        return r;
    }

    IntMatrix operator*(const IntMatrix& o) const {
        if (n_ != o.n_) throw std::invalid_argument("IntMatrix: product dimension mismatch");
        std::vector<Coord> e(size_t(n_) * n_, 0);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                Int128 acc = 0;
                for (int k = 0; k < n_; ++k) acc += Int128((*this)(i, k)) * o(k, j);
                if (acc > Int128(1) << 62 || acc < -(Int128(1) << 62))
                    throw std::overflow_error("IntMatrix: entry overflow in product");
                e[size_t(i) * n_ + j] = Coord(acc);
            }
        return IntMatrix(n_, std::move(e));
    }

    IntMatrix transpose() const {
        std::vector<Coord> e(size_t(n_) * n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) e[size_t(j) * n_ + i] = (*this)(i, j);
        return IntMatrix(n_, std::move(e));
    }

    RatMatrix to_rational() const {
        RatMatrix m(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) m(i, j) = Rational((*this)(i, j));
        return m;
    }

    bool operator==(const IntMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }

private:
    Coord bareiss_det() const {
        std::vector<Int128> m(a_.begin(), a_.end());
        auto at = [&](int i, int j) -> Int128& { return m[size_t(i) * n_ + j]; };
        Int128 prev = 1;
        int sign = 1;
        for (int k = 0; k < n_ - 1; ++k) {
            if (at(k, k) == 0) {
                int piv = -1;
                for (int r = k + 1; r < n_; ++r)
                    if (at(r, k) != 0) {
                        piv = r;
                        break;
                    }
                if (piv < 0) return 0;
                for (int c = 0; c < n_; ++c) std::swap(at(k, c), at(piv, c));
                sign = -sign;
            }
            for (int i = k + 1; i < n_; ++i)
                for (int j = k + 1; j < n_; ++j)
                    at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
            prev = at(k, k);
        }
        Int128 d = at(n_ - 1, n_ - 1) * sign;
        if (d > Int128(1) << 62 || d < -(Int128(1) << 62))
            throw std::overflow_error("IntMatrix: determinant overflow");
        return Coord(d);
    }

    int n_;
    std::vector<Coord> a_;
    Coord det_;
    std::optional<RatMatrix> inv_;
};

/// Finite set of lattice points in canonical (lexicographic) order.
class LatticeSet {
public:
    explicit LatticeSet(int dim) : dim_(dim) {
        if (dim < 1) throw std::invalid_argument("LatticeSet: dimension must be >= 1");
    }
    LatticeSet(int dim, std::vector<Point> pts) : LatticeSet(dim) {
        for (const Point& p : pts)
            if (int(p.size()) != dim)
                throw std::invalid_argument("LatticeSet: point dimension mismatch");
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        pts_ = std::move(pts);
    }

    static LatticeSet origin(int dim) { return LatticeSet(dim, {Point(dim, 0)}); }

    int dim() const { return dim_; }
    size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }
    const std::vector<Point>& points() const { return pts_; }
    const Point& operator[](size_t i) const { return pts_[i]; }

    bool contains(const Point& p) const {
        return std::binary_search(pts_.begin(), pts_.end(), p);
    }

    /// Index of p in canonical order, or npos.
    size_t index_of(const Point& p) const {
        auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
        if (it == pts_.end() || *it != p) return npos;
        return size_t(it - pts_.begin());
    }

    bool is_subset_of(const LatticeSet& o) const {
        for (const Point& p : pts_)
            if (!o.contains(p)) return false;
        return true;
    }

    bool operator==(const LatticeSet& o) const { return dim_ == o.dim_ && pts_ == o.pts_; }

    static constexpr size_t npos = size_t(-1);

private:
    int dim_;
    std::vector<Point> pts_;
};

inline LatticeSet set_union(const LatticeSet& a, const LatticeSet& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("set_union: dimension mismatch");
    std::vector<Point> pts = a.points();
    pts.insert(pts.end(), b.points().begin(), b.points().end());
    return LatticeSet(a.dim(), std::move(pts));
}

inline LatticeSet minkowski_sum(const LatticeSet& a, const LatticeSet& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("minkowski_sum: dimension mismatch");
    std::vector<Point> pts;
    pts.reserve(a.size() * b.size());
    for (const Point& p : a.points())
        for (const Point& q : b.points()) pts.push_back(point_add(p, q));
    return LatticeSet(a.dim(), std::move(pts));
}

inline LatticeSet negate(const LatticeSet& a) {
    std::vector<Point> pts;
    pts.reserve(a.size());
    for (const Point& p : a.points()) pts.push_back(point_neg(p));
    return LatticeSet(a.dim(), std::move(pts));
}

inline LatticeSet translate(const LatticeSet& a, const Point& t) {
    std::vector<Point> pts;
    pts.reserve(a.size());
    for (const Point& p : a.points()) pts.push_back(point_add(p, t));
    return LatticeSet(a.dim(), std::move(pts));
}

/// Forward image {M x : x in a}.
inline LatticeSet image(const IntMatrix& m, const LatticeSet& a) {
    if (m.dim() != a.dim()) throw std::invalid_argument("image: dimension mismatch");
    std::vector<Point> pts;
    pts.reserve(a.size());
    for (const Point& p : a.points()) pts.push_back(m.apply(p));
    return LatticeSet(a.dim(), std::move(pts));
}

namespace detail {

/// M^{-1} x if integral, computed exactly in rationals.
inline std::optional<Point> rational_preimage(const IntMatrix& m, const Point& x) {
    std::vector<Rational> v(x.size());
    for (size_t i = 0; i < x.size(); ++i) v[i] = Rational(x[i]);
    std::vector<Rational> y = m.inverse().apply(v);
    Point r(x.size());
    for (size_t i = 0; i < y.size(); ++i) {
        if (!y[i].is_integer()) return std::nullopt;
        Int128 c = y[i].num();
        if (c > Int128(1) << 62 || c < -(Int128(1) << 62))
            throw std::overflow_error("preimage coordinate overflow");
        r[i] = Coord(c);
    }
    return r;
}

} // namespace detail

/// {alpha in Z^s : M alpha in X}, decided exactly (no floating rounding).
inline LatticeSet preimage_lattice(const IntMatrix& m, const LatticeSet& x) {
    if (m.dim() != x.dim()) throw std::invalid_argument("preimage_lattice: dimension mismatch");
    if (!m.invertible()) throw std::invalid_argument("preimage_lattice: matrix not invertible");
    std::vector<Point> pts;
    for (const Point& p : x.points())
        if (auto q = detail::rational_preimage(m, p)) pts.push_back(*q);
    return LatticeSet(x.dim(), std::move(pts));
}

/// The standard digit set Z^s \cap M [0,1)^s, enumerated over the bounding box
/// of the parallelepiped vertices and filtered by an exact half-open test.
inline LatticeSet digit_set(const IntMatrix& m) {
    if (!m.invertible()) throw std::invalid_argument("digit_set: matrix not invertible");
    const Coord adet = std::llabs(m.det());
    if (adet < 2)
        throw std::invalid_argument("digit_set: |det M| = " + std::to_string(adet) +
                                    " is not expanding enough to carry digits");
    const int s = m.dim();
    std::vector<Coord> lo(s, 0), hi(s, 0);
    for (unsigned mask = 0; mask < (1u << s); ++mask) {
        Point v(s);
        for (int i = 0; i < s; ++i) v[i] = (mask >> i) & 1u;
        Point w = m.apply(v);
        for (int i = 0; i < s; ++i) {
            lo[i] = std::min(lo[i], w[i]);
            hi[i] = std::max(hi[i], w[i]);
        }
    }
    std::vector<Point> pts;
    Point cur(s);
    const Rational one(1);
    auto scan = [&](auto&& self, int axis) -> void {
        if (axis == s) {
            std::vector<Rational> v(s);
            for (int i = 0; i < s; ++i) v[i] = Rational(cur[i]);
            std::vector<Rational> y = m.inverse().apply(v);
            for (int i = 0; i < s; ++i)
                if (y[i].sign() < 0 || y[i] >= one) return;
            pts.push_back(cur);
            return;
        }
        for (Coord c = lo[axis]; c <= hi[axis]; ++c) {
            cur[axis] = c;
            self(self, axis + 1);
        }
    };
    scan(scan, 0);
    if (Coord(pts.size()) != adet)
        throw std::logic_error("digit_set: enumeration produced " + std::to_string(pts.size()) +
                               " digits, expected " + std::to_string(adet));
    return LatticeSet(s, std::move(pts));
}

/// True iff D is a complete set of representatives of Z^s / M Z^s.
inline bool verify_digit_set(const IntMatrix& m, const LatticeSet& d) {
    if (m.dim() != d.dim()) throw std::invalid_argument("verify_digit_set: dimension mismatch");
    if (!m.invertible()) return false;
    if (Coord(d.size()) != std::llabs(m.det())) return false;
    const auto& pts = d.points();
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            if (detail::rational_preimage(m, point_sub(pts[i], pts[j]))) return false;
    return true;
}

} // namespace msubdiv
