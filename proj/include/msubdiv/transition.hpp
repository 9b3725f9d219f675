#pragma once

#include <string>
#include <vector>

#include "msubdiv/omega.hpp"

namespace msubdiv {

/// T[alpha, beta] = a_j(M_j alpha - beta + d), rows and columns indexed by the
/// points of Omega in the given order.
struct TransitionMatrix {
    RatMatrix entries;
    Point digit;
    std::string op_label;
    std::vector<Point> omega_order;
};

inline std::vector<Rational> column_sums(const TransitionMatrix& t) {
    std::vector<Rational> sums(t.entries.cols());
    for (int j = 0; j < t.entries.cols(); ++j)
        for (int i = 0; i < t.entries.rows(); ++i) sums[size_t(j)] += t.entries(i, j);
    return sums;
}

/// The raw matrix of the formula over an arbitrary ordered point list, with no
/// invariance precondition (the column-sum criterion reads invariance off it).
inline RatMatrix transition_entries(const SubdivisionOp& op, const Point& digit,
                                    const std::vector<Point>& order) {
    const int n = int(order.size());
    RatMatrix m(n, n);
    for (int r = 0; r < n; ++r) {
        Point ma = op.dilation.apply(order[size_t(r)]);
        for (int c = 0; c < n; ++c)
            m(r, c) = op.mask.at(point_add(point_sub(ma, order[size_t(c)]), digit));
    }
    return m;
}

/// One matrix per (operator, digit), over an Omega whose sequence space is
/// invariant. The point order defaults to the canonical one; any explicit
/// order must be a permutation of Omega.
inline std::vector<TransitionMatrix> build_transition_matrices(
    const SchemeSet& s, const LatticeSet& omega, std::vector<Point> order = {}) {
    InvarianceReport inv = verify_invariance(s, omega);
    if (!inv.ok) {
        const auto& v = inv.violations.front();
        throw std::invalid_argument(
            "build_transition_matrices: l(Omega) not invariant; operator \"" + v.op_label +
            "\", digit " + point_str(v.digit) + " leaks from " + point_str(v.beta) + " to " +
            point_str(v.alpha) + " (restriction would be ill-defined)");
    }
    if (order.empty()) order = omega.points();
    if (LatticeSet(omega.dim(), order) != omega || order.size() != omega.size())
        throw std::invalid_argument("build_transition_matrices: order is not a permutation of Omega");
    std::vector<TransitionMatrix> out;
    for (const auto& op : s.ops) {
        for (const Point& d : op.digits.points()) {
            TransitionMatrix t;
            t.digit = d;
            t.op_label = op.label;
            t.omega_order = order;
            t.entries = transition_entries(op, d, order);
            out.push_back(std::move(t));
        }
    }
    return out;
}

/// The transition family restricted to the zero-mean subspace, in a fixed
/// basis stored column-wise in `basis` (each column sums to zero). For each
/// family member, entries * basis = basis * restricted holds exactly.
struct RestrictedFamily {
    RatMatrix basis; // |Omega| x (|Omega|-1)
    struct Member {
        RatMatrix restricted;
        Point digit;
        std::string op_label;
    };
    std::vector<Member> members;
};

namespace detail {

inline RestrictedFamily restrict_with_basis(const std::vector<TransitionMatrix>& family,
                                            RatMatrix basis) {
    RestrictedFamily out;
    out.basis = std::move(basis);
    for (const auto& t : family) {
        RestrictedFamily::Member m;
        m.digit = t.digit;
        m.op_label = t.op_label;
        if (out.basis.cols() == 0)
            m.restricted = RatMatrix(0, 0);
        else
            m.restricted = RatMatrix::solve_full_column_rank(out.basis, t.entries * out.basis);
        out.members.push_back(std::move(m));
    }
    return out;
}

} // namespace detail

/// Basis of difference impulses over the spanning-tree edges; requires the
/// l1-graph on Omega to be connected so the difference impulses span the
/// whole zero-mean subspace.
inline RestrictedFamily restrict_to_difference_space(const std::vector<TransitionMatrix>& family,
                                                     const DifferenceSpaceReport& report) {
    if (family.empty()) throw std::invalid_argument("restrict_to_difference_space: empty family");
    if (report.components != 1)
        throw std::invalid_argument(
            "restrict_to_difference_space: l1-graph on Omega is disconnected (dim Vtilde < dim V); "
            "use select_omega to obtain a connected invariant set");
    const auto& order = family.front().omega_order;
    const int n = int(order.size());
    LatticeSet omega(int(order.front().size()), order);
    RatMatrix basis(n, n - 1);
    for (int e = 0; e < n - 1; ++e) {
        const auto& [w1, w2] = report.spanning_edges[size_t(e)];
        size_t i1 = omega.index_of(w1), i2 = omega.index_of(w2);
        if (i1 == LatticeSet::npos || i2 == LatticeSet::npos)
            throw std::invalid_argument("restrict_to_difference_space: edge endpoint outside Omega");
        basis(int(i1), e) = Rational(1);
        basis(int(i2), e) = Rational(-1);
    }
    return detail::restrict_with_basis(family, std::move(basis));
}

/// Star basis e_alpha - e_alpha0 against the first point of Omega. Spans the
/// zero-mean subspace for any Omega (connected or not); kept as a cross-check
/// and for degenerate index sets.
inline RestrictedFamily restrict_star_basis(const std::vector<TransitionMatrix>& family) {
    if (family.empty()) throw std::invalid_argument("restrict_star_basis: empty family");
    const int n = int(family.front().omega_order.size());
    RatMatrix basis(n, n - 1);
    for (int e = 0; e < n - 1; ++e) {
        basis(e + 1, e) = Rational(1);
        basis(0, e) = Rational(-1);
    }
    return detail::restrict_with_basis(family, std::move(basis));
}

} // namespace msubdiv
