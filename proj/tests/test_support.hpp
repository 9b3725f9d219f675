#pragma once

// Shared generators for the randomized suites. Everything is seeded
// explicitly so failures replay.

#include <algorithm>
#include <random>

#include "msubdiv/scheme.hpp"

namespace msubdiv::testgen {

inline IntMatrix random_dilation(std::mt19937& gen, int dim) {
    if (dim == 1) {
        static const Coord choices[] = {2, -2, 3, -3};
        return IntMatrix::scalar(choices[gen() % 4]);
    }
    for (;;) {
        std::vector<Coord> e(size_t(dim) * size_t(dim));
        for (auto& v : e) v = Coord(gen() % 7) - 3;
        IntMatrix m(dim, e);
        Coord d = std::llabs(m.det());
        if (d >= 2 && d <= 6) return m;
    }
}

/// Mask satisfying the sum rules by construction: each digit coset receives
/// one or two support points whose weights add to one.
inline Mask random_sum_rule_mask(std::mt19937& gen, const IntMatrix& m, const LatticeSet& digits,
                                 bool nonneg = true) {
    const int dim = m.dim();
    std::map<Point, Rational> coef;
    for (const Point& d : digits.points()) {
        int parts = 1 + int(gen() % 2);
        std::vector<Point> betas;
        while (int(betas.size()) < parts) {
            Point b(size_t(dim), 0);
            for (auto& c : b) c = Coord(gen() % 3) - 1;
            if (std::find(betas.begin(), betas.end(), b) == betas.end()) betas.push_back(b);
        }
        if (parts == 1) {
            coef[point_add(m.apply(betas[0]), d)] += Rational(1);
        } else {
            long long q = 2 + long(gen() % 5);
            long long p = 1 + long(gen() % (q - 1));
            Rational w1(p, q);
            if (!nonneg && gen() % 3 == 0) w1 = Rational(-(1 + long(gen() % 3)), q);
            coef[point_add(m.apply(betas[0]), d)] += w1;
            coef[point_add(m.apply(betas[1]), d)] += Rational(1) - w1;
        }
    }
    return Mask(dim, coef);
}

inline SchemeSet random_scheme(std::mt19937& gen, int dim, int op_count, bool nonneg = true) {
    std::vector<SubdivisionOp> ops;
    for (int j = 0; j < op_count; ++j) {
        IntMatrix m = random_dilation(gen, dim);
        LatticeSet digits = digit_set(m);
        Mask mask = random_sum_rule_mask(gen, m, digits, nonneg);
        ops.emplace_back("S" + std::to_string(j + 1), std::move(mask), std::move(m));
    }
    return SchemeSet(std::move(ops));
}

inline BoundedSequence random_sequence(std::mt19937& gen, int dim, int points) {
    BoundedSequence c(dim);
    for (int i = 0; i < points; ++i) {
        Point p(size_t(dim), 0);
        for (auto& v : p) v = Coord(gen() % 9) - 4;
        c.set(p, Rational(Coord(gen() % 11) - 5, 1 + Coord(gen() % 4)));
    }
    return c;
}

} // namespace msubdiv::testgen
