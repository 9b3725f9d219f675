#pragma once

#include <deque>
#include <string>
#include <vector>

#include "msubdiv/scheme.hpp"

namespace msubdiv {

enum class OmegaProvenance { algorithmic, enlarged, ball, user };

inline const char* to_string(OmegaProvenance p) {
    switch (p) {
        case OmegaProvenance::algorithmic: return "algorithmic";
        case OmegaProvenance::enlarged: return "enlarged";
        case OmegaProvenance::ball: return "ball";
        case OmegaProvenance::user: return "user";
    }
    return "?";
}

struct OmegaSet {
    LatticeSet points;
    OmegaProvenance provenance;
    LatticeSet seeded_from;
};

/// One closure step for operator j: (M_j^{-1}(supp a_j + Omega - D_j)) cap Z^s.
inline LatticeSet transition_stencil_step(const SubdivisionOp& op, const LatticeSet& omega) {
    LatticeSet shifted = minkowski_sum(minkowski_sum(op.mask.support(), omega), negate(op.digits));
    return preimage_lattice(op.dilation, shifted);
}

/// Fixed point of Omega <- Omega cup U_j (M_j^{-1}(supp a_j + Omega - D_j)) cap Z^s,
/// starting from `seed`. Terminates for jointly expanding dilations; the
/// iteration cap flags non-expanding input that slipped through validation.
inline OmegaSet construct_omega_c(const SchemeSet& s, LatticeSet seed, int iteration_cap = 10000) {
    if (seed.dim() != s.dim()) throw std::invalid_argument("construct_omega_c: seed dimension mismatch");
    if (seed.empty()) throw std::invalid_argument("construct_omega_c: empty seed");
    LatticeSet omega = seed;
    for (int it = 0; it < iteration_cap; ++it) {
        LatticeSet next = omega;
        for (const auto& op : s.ops) next = set_union(next, transition_stencil_step(op, omega));
        if (next == omega) return {omega, OmegaProvenance::algorithmic, seed};
        omega = std::move(next);
    }
    throw std::runtime_error(
        "construct_omega_c: no fixed point within iteration cap (input not jointly expanding?)");
}

inline OmegaSet construct_omega_c(const SchemeSet& s) {
    return construct_omega_c(s, LatticeSet::origin(s.dim()));
}

/// Integer ball of radius (C_a + C_D) / (1 - C_M); invariant whenever every
/// dilation inverse has 2-norm below one.
inline OmegaSet construct_omega_v(const SchemeSet& s) {
    for (const auto& e : check_assumption_n(s))
        if (!e.ok)
            throw std::invalid_argument("construct_omega_v: dilation \"" + e.label +
                                        "\" has norm2(M^{-1}) >= 1; take a scheme power "
                                        "(power_scheme_set) first");
    double c_a = 0, c_d = 0, c_m = 0;
    for (const auto& op : s.ops) {
        const LatticeSet supp = op.mask.support();
        for (const Point& p : supp.points()) c_a = std::max(c_a, l2_norm(p));
        for (const Point& d : op.digits.points()) c_d = std::max(c_d, l2_norm(d));
        c_m = std::max(c_m, operator_norm_2(to_eigen(op.dilation.inverse())));
    }
    c_m += 1e-12; // round up: any radius at least the exact bound stays invariant
    const double radius = (c_a + c_d) / (1.0 - c_m);
    const double r2 = radius * radius + 1e-9;
    const auto box = Coord(std::floor(radius + 1e-9));
    const int dim = s.dim();
    std::vector<Point> pts;
    Point cur(dim);
    auto scan = [&](auto&& self, int axis) -> void {
        if (axis == dim) {
            double n2 = 0;
            for (Coord c : cur) n2 += double(c) * double(c);
            if (n2 <= r2) pts.push_back(cur);
            return;
        }
        for (Coord c = -box; c <= box; ++c) {
            cur[axis] = c;
            self(self, axis + 1);
        }
    };
    scan(scan, 0);
    return {LatticeSet(dim, std::move(pts)), OmegaProvenance::ball, LatticeSet::origin(dim)};
}

struct InvarianceViolation {
    std::string op_label;
    Point digit;
    Point alpha; // stencil point outside Omega
    Point beta;  // witness inside Omega
};

struct InvarianceReport {
    bool ok = true;
    std::vector<InvarianceViolation> violations;
};

/// Direct check: a_j(M_j alpha - beta + d) must vanish whenever beta is in
/// Omega and alpha is not.
inline InvarianceReport verify_invariance(const SchemeSet& s, const LatticeSet& omega) {
    if (omega.dim() != s.dim()) throw std::invalid_argument("verify_invariance: dimension mismatch");
    InvarianceReport rep;
    for (const auto& op : s.ops) {
        for (const Point& d : op.digits.points()) {
            for (const Point& beta : omega.points()) {
                for (const auto& [sigma, v] : op.mask.coefficients()) {
                    // alpha solves M alpha = sigma + beta - d
                    auto alpha = detail::rational_preimage(op.dilation,
                                                           point_sub(point_add(sigma, beta), d));
                    if (!alpha || omega.contains(*alpha)) continue;
                    rep.ok = false;
                    rep.violations.push_back({op.label, d, *alpha, beta});
                }
            }
        }
    }
    return rep;
}

struct DifferenceSpaceReport {
    int dimV = 0;
    int dimVtilde = 0;
    int components = 0;
    std::vector<std::pair<Point, Point>> spanning_edges;  // (parent, child) in BFS order
    std::vector<std::vector<Point>> component_points;     // each sorted; list ordered by minimum
};

/// l1-neighbour graph on Omega: dimV = |Omega| - 1, dimVtilde = |Omega| - #components.
/// Spanning forest by BFS from the lexicographically smallest point per component.
inline DifferenceSpaceReport difference_space_report(const LatticeSet& omega) {
    if (omega.empty()) throw std::invalid_argument("difference_space_report: empty set");
    const auto& pts = omega.points();
    const int dim = omega.dim();
    std::vector<char> seen(pts.size(), 0);
    DifferenceSpaceReport rep;
    rep.dimV = int(pts.size()) - 1;
    for (size_t start = 0; start < pts.size(); ++start) {
        if (seen[start]) continue;
        ++rep.components;
        std::vector<Point> comp;
        std::deque<size_t> queue{start};
        seen[start] = 1;
        while (!queue.empty()) {
            size_t u = queue.front();
            queue.pop_front();
            comp.push_back(pts[u]);
            for (int axis = 0; axis < dim; ++axis) {
                for (Coord step : {Coord(1), Coord(-1)}) {
                    Point q = pts[u];
                    q[axis] += step;
                    size_t vi = omega.index_of(q);
                    if (vi == LatticeSet::npos || seen[vi]) continue;
                    seen[vi] = 1;
                    rep.spanning_edges.emplace_back(pts[u], pts[vi]);
                    queue.push_back(vi);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        rep.component_points.push_back(std::move(comp));
    }
    rep.dimVtilde = int(pts.size()) - rep.components;
    return rep;
}

namespace detail {

/// Axis-monotone l1 staircase strictly between a and b (endpoints excluded).
inline std::vector<Point> staircase_between(const Point& a, const Point& b) {
    std::vector<Point> out;
    Point cur = a;
    for (size_t axis = 0; axis < a.size(); ++axis) {
        while (cur[axis] != b[axis]) {
            cur[axis] += (b[axis] > cur[axis]) ? 1 : -1;
            if (cur != b) out.push_back(cur);
        }
    }
    return out;
}

/// Points joining all components: repeatedly connect the closest pair of
/// components (ties broken lexicographically on the point pair).
inline std::vector<Point> joining_paths(const DifferenceSpaceReport& rep) {
    std::vector<std::vector<Point>> comps = rep.component_points;
    std::vector<Point> added;
    while (comps.size() > 1) {
        Coord best = -1;
        std::pair<Point, Point> bestpair;
        size_t bi = 0, bj = 0;
        for (size_t i = 0; i < comps.size(); ++i)
            for (size_t j = i + 1; j < comps.size(); ++j)
                for (const Point& p : comps[i])
                    for (const Point& q : comps[j]) {
                        Coord d = l1_distance(p, q);
                        auto pr = p < q ? std::make_pair(p, q) : std::make_pair(q, p);
                        if (best < 0 || d < best || (d == best && pr < bestpair)) {
                            best = d;
                            bestpair = pr;
                            bi = i;
                            bj = j;
                        }
                    }
        auto path = staircase_between(bestpair.first, bestpair.second);
        added.insert(added.end(), path.begin(), path.end());
        comps[bi].insert(comps[bi].end(), comps[bj].begin(), comps[bj].end());
        comps[bi].insert(comps[bi].end(), path.begin(), path.end());
        std::sort(comps[bi].begin(), comps[bi].end());
        comps.erase(comps.begin() + long(bj));
    }
    return added;
}

} // namespace detail

/// Invariant set satisfying both main-theorem hypotheses: Omega_C when its
/// l1-graph is connected, otherwise Omega_C re-seeded with joining staircases,
/// with the norm ball as the last resort.
inline OmegaSet select_omega(const SchemeSet& s, int iteration_cap = 10000) {
    OmegaSet omega = construct_omega_c(s, LatticeSet::origin(s.dim()), iteration_cap);
    if (difference_space_report(omega.points).components == 1) return omega;

    LatticeSet seed = omega.points;
    for (int round = 0; round < 8; ++round) {
        std::vector<Point> joins = detail::joining_paths(difference_space_report(seed));
        seed = set_union(seed, LatticeSet(s.dim(), std::move(joins)));
        OmegaSet enlarged = construct_omega_c(s, seed, iteration_cap);
        enlarged.provenance = OmegaProvenance::enlarged;
        if (difference_space_report(enlarged.points).components == 1) return enlarged;
        seed = enlarged.points;
    }
    return construct_omega_v(s);
}

} // namespace msubdiv
