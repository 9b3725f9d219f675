#pragma once

#include <random>
#include <string>
#include <vector>

#include "msubdiv/jsr.hpp"
#include "msubdiv/transition.hpp"

namespace msubdiv {

enum class Verdict { convergent, not_convergent, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::convergent: return "convergent";
        case Verdict::not_convergent: return "not-convergent";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct ConvergenceReport {
    Verdict verdict = Verdict::inconclusive;
    bool jsr_ran = false;
    OmegaSet omega{LatticeSet(1), OmegaProvenance::user, LatticeSet(1)};
    DifferenceSpaceReport dims;
    JsrEstimate jsr;
    // assumptions record
    bool sum_rules = false;
    ExpansionReport expansion;
    std::vector<AssumptionNEntry> assumption_n;
    int power_n = 1;  // scheme power actually analyzed
    std::string precondition_failure;  // nonempty when a stage refused
    std::vector<std::string> trail;
};

struct AnalysisBudget {
    JsrBudget jsr;
    int expansion_depth = 4;
    int max_power = 4;
    int omega_iteration_cap = 10000;
};

inline MatrixFamily to_matrix_family(const RestrictedFamily& rf) {
    MatrixFamily f;
    for (const auto& m : rf.members) {
        f.mats.push_back(to_eigen(m.restricted));
        f.labels.push_back(m.op_label + "|" + point_str(m.digit));
    }
    return f;
}

/// Full pipeline: sum rules, joint expansion, invariant-set selection (with
/// the scheme-power fallback when the norm ball needs it), transition family,
/// restriction, JSR bracket, verdict.
inline ConvergenceReport analyze_convergence(const SchemeSet& s, const AnalysisBudget& budget = {}) {
    ConvergenceReport rep;
    for (const auto& op : s.ops) {
        auto sr = check_sum_rules(op);
        if (!sr.ok) {
            rep.verdict = Verdict::not_convergent;
            rep.precondition_failure = "sum-rules: operator \"" + op.label +
                                       "\" violates the coset sums (necessary for convergence)";
            rep.trail.push_back("sum-rules: FAIL on \"" + op.label + "\"");
            return rep;
        }
        if (!op.mask.origin_in_support())
            rep.trail.push_back("warning: 0 not in supp(a) for \"" + op.label + "\"");
    }
    rep.sum_rules = true;
    rep.trail.push_back("sum-rules: ok");

    rep.expansion = check_jointly_expanding(s, budget.expansion_depth);
    if (rep.expansion.verdict == Expansion::certified_no) {
        rep.verdict = Verdict::inconclusive;
        rep.precondition_failure =
            "jointly-expanding: certified violation (a product of dilation inverses has spectral "
            "radius >= 1); the scheme family is outside the method's scope";
        rep.trail.push_back("jointly-expanding: certified-no");
        return rep;
    }
    rep.trail.push_back(std::string("jointly-expanding: ") +
                        (rep.expansion.verdict == Expansion::certified_yes ? "certified-yes"
                                                                           : "inconclusive") +
                        " at depth " + std::to_string(rep.expansion.depth));

    rep.assumption_n = check_assumption_n(s);

    const SchemeSet* analyzed = &s;
    SchemeSet powered = s;  // reassigned if the fallback fires
    try {
        rep.omega = select_omega(s, budget.omega_iteration_cap);
    } catch (const std::invalid_argument&) {
        // Norm-ball fallback needs every ||M^{-1}||_2 < 1; analyze a scheme
        // power whose composed dilations satisfy it.
        auto n = smallest_assumption_n_power(s, budget.max_power);
        if (!n) {
            rep.verdict = Verdict::inconclusive;
            rep.precondition_failure =
                "assumption-n: no scheme power up to " + std::to_string(budget.max_power) +
                " brings all composed dilation inverses below unit 2-norm";
            return rep;
        }
        rep.power_n = *n;
        powered = power_scheme_set(s, *n);
        analyzed = &powered;
        rep.trail.push_back("fallback: analyzing scheme power n=" + std::to_string(*n));
        rep.omega = select_omega(powered, budget.omega_iteration_cap);
    }
    rep.trail.push_back("omega: " + std::string(to_string(rep.omega.provenance)) + ", " +
                        std::to_string(rep.omega.points.size()) + " points");

    rep.dims = difference_space_report(rep.omega.points);
    auto family = build_transition_matrices(*analyzed, rep.omega.points);
    RestrictedFamily rf = rep.omega.points.size() == 1
                              ? restrict_star_basis(family)
                              : restrict_to_difference_space(family, rep.dims);
    rep.jsr = jsr_estimate(to_matrix_family(rf), budget.jsr);
    rep.jsr_ran = true;
    rep.trail.push_back("jsr: [" + std::to_string(rep.jsr.lower) + ", " +
                        std::to_string(rep.jsr.upper) + "] " + to_string(rep.jsr.status));

    if (rep.jsr.upper < 1.0 && rep.jsr.lower < 1.0 - 1e-12)
        rep.verdict = Verdict::convergent;
    else if (rep.jsr.lower >= 1.0 - 1e-12 && rep.jsr.upper >= 1.0)
        rep.verdict = Verdict::not_convergent;
    else
        rep.verdict = Verdict::inconclusive;
    return rep;
}

/// Backward-difference sup norms m_n = max_{l, alpha} |nabla_l (S_{j_n} ... S_{j_1} delta)(alpha)|
/// along a word of operator indices, computed exactly. Entry k of the result
/// is (k, m_k); m_0 = 1.
inline std::vector<std::pair<int, Rational>> difference_decay(const SchemeSet& s,
                                                              const std::vector<size_t>& word) {
    if (word.empty()) throw std::invalid_argument("difference_decay: empty word");
    for (size_t j : word)
        if (j >= s.count()) throw std::invalid_argument("difference_decay: operator index out of range");
    if (!all_sum_rules_hold(s))
        throw std::invalid_argument("difference_decay: sum rules required");

    std::vector<std::pair<int, Rational>> out;
    BoundedSequence c = BoundedSequence::delta(s.dim());
    const int dim = s.dim();
    auto record = [&](int n, const BoundedSequence& seq) {
        // nabla value at alpha is seq(alpha) - seq(alpha - e_l); nonzero only
        // when alpha or alpha - e_l carries a deviation.
        Rational m(0);
        if (dim <= 4) {
            // shifting one packed coordinate field preserves the key order, so
            // each axis reduces to a sorted two-pointer merge
            std::vector<unsigned __int128> keys;
            keys.reserve(seq.deviation().size());
            for (const auto& [p, v] : seq.deviation()) keys.push_back(detail::pack_point(p));
            const auto& dev = seq.deviation();
            for (int axis = 0; axis < dim; ++axis) {
                const unsigned __int128 step = (unsigned __int128)(1)
                                               << (32 * (dim - 1 - axis));
                size_t i = 0, j = 0;
                while (i < keys.size() || j < keys.size()) {
                    bool ai = i < keys.size();
                    bool bj = j < keys.size();
                    Rational d;
                    if (ai && bj && keys[i] == keys[j] + step) {
                        d = (dev[i].second - dev[j].second).abs();
                        ++i;
                        ++j;
                    } else if (ai && (!bj || keys[i] < keys[j] + step)) {
                        d = dev[i].second.abs();
                        ++i;
                    } else {
                        d = dev[j].second.abs();
                        ++j;
                    }
                    if (d > m) m = d;
                }
            }
        } else {
            for (const auto& [p, v] : seq.deviation()) {
                for (int axis = 0; axis < dim; ++axis) {
                    Point back = p;
                    back[size_t(axis)] -= 1;
                    Point fwd = p;
                    fwd[size_t(axis)] += 1;
                    Rational d1 = (seq.at(p) - seq.at(back)).abs();
                    Rational d2 = (seq.at(fwd) - seq.at(p)).abs();
                    if (d1 > m) m = d1;
                    if (d2 > m) m = d2;
                }
            }
        }
        out.emplace_back(n, m);
    };
    record(0, c);
    for (size_t k = 0; k < word.size(); ++k) {
        c = apply_subdivision(s.ops[word[k]], c);
        record(int(k) + 1, c);
    }
    return out;
}

struct PointCloud {
    int dim = 0;
    std::vector<std::vector<double>> points;
    std::vector<double> values;  // parallel to points when nonempty
    int depth = 0;
    std::vector<size_t> word;
    bool subsampled = false;
};

namespace detail {

inline void canonical_sort(PointCloud& pc) {
    if (pc.values.empty()) {
        std::sort(pc.points.begin(), pc.points.end());
        return;
    }
    std::vector<size_t> idx(pc.points.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        if (pc.points[a] != pc.points[b]) return pc.points[a] < pc.points[b];
        return pc.values[a] < pc.values[b];
    });
    std::vector<std::vector<double>> pts(idx.size());
    std::vector<double> vals(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        pts[i] = pc.points[idx[i]];
        vals[i] = pc.values[idx[i]];
    }
    pc.points = std::move(pts);
    pc.values = std::move(vals);
}

} // namespace detail

/// All truncated digit expansions sum_{r<=n} (M_{j_1}^{-1} ... M_{j_r}^{-1}) d_r
/// over digit choices d_r. Beyond `max_points` the cloud is decimated with a
/// fixed-seed shuffle and flagged.
inline PointCloud attractor_points(const SchemeSet& s, const std::vector<size_t>& word,
                                   size_t max_points = 200000) {
    if (word.empty()) throw std::invalid_argument("attractor_points: empty word");
    for (size_t j : word)
        if (j >= s.count()) throw std::invalid_argument("attractor_points: operator index out of range");
    const int dim = s.dim();
    PointCloud pc;
    pc.dim = dim;
    pc.depth = int(word.size());
    pc.word = word;

    // Q_r = M_{j_1}^{-1} ... M_{j_r}^{-1} as doubles.
    std::vector<Eigen::MatrixXd> q;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(dim, dim);
    for (size_t j : word) {
        acc = acc * to_eigen(s.ops[j].dilation.inverse());
        q.push_back(acc);
    }
    double total = 1;
    for (size_t j : word) total *= double(s.ops[j].digits.size());
    std::vector<Eigen::VectorXd> pts;
    const double enumeration_cap = 4e6;
    if (total <= enumeration_cap) {
        auto dfs = [&](auto&& self, size_t level, const Eigen::VectorXd& x) -> void {
            if (level == word.size()) {
                pts.push_back(x);
                return;
            }
            for (const Point& d : s.ops[word[level]].digits.points()) {
                Eigen::VectorXd dv(dim);
                for (int i = 0; i < dim; ++i) dv(i) = double(d[size_t(i)]);
                self(self, level + 1, x + q[level] * dv);
            }
        };
        dfs(dfs, 0, Eigen::VectorXd::Zero(dim));
        if (pts.size() > max_points) {
            // Deterministic decimation: fixed-seed partial shuffle, keep the
            // first max_points (raw mt19937 outputs are portable).
            std::mt19937 gen(0x5eed);
            for (size_t i = 0; i < max_points; ++i) {
                size_t j = i + size_t(gen() % (pts.size() - i));
                std::swap(pts[i], pts[j]);
            }
            pts.resize(max_points);
            pc.subsampled = true;
        }
    } else {
        // Too many expansions to enumerate: draw digit words directly with a
        // fixed seed.
        std::mt19937 gen(0x5eed);
        for (size_t i = 0; i < max_points; ++i) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
            for (size_t level = 0; level < word.size(); ++level) {
                const auto& digits = s.ops[word[level]].digits;
                const Point& d = digits[size_t(gen() % digits.size())];
                Eigen::VectorXd dv(dim);
                for (int i2 = 0; i2 < dim; ++i2) dv(i2) = double(d[size_t(i2)]);
                x += q[level] * dv;
            }
            pts.push_back(std::move(x));
        }
        pc.subsampled = true;
    }
    pc.points.reserve(pts.size());
    for (const auto& x : pts) {
        std::vector<double> v(size_t(dim), 0.0);
        for (int i = 0; i < dim; ++i) v[size_t(i)] = x(i);
        pc.points.push_back(std::move(v));
    }
    detail::canonical_sort(pc);
    return pc;
}

/// Support cloud of the n-step impulse iteration along `word` starting at
/// shift r (1-based): computes c_n = S_{j_{r+n-1}} ... S_{j_r} delta and maps
/// each support point alpha to M_{j_r}^{-1} ... M_{j_{r+n-1}}^{-1} alpha. The
/// value channel carries c_n(alpha).
inline PointCloud blf_support(const SchemeSet& s, const std::vector<size_t>& word, int shift = 1,
                              size_t max_points = 2000000) {
    if (word.empty()) throw std::invalid_argument("blf_support: empty word");
    if (shift < 1 || size_t(shift) > word.size())
        throw std::invalid_argument("blf_support: shift out of range");
    for (size_t j : word)
        if (j >= s.count()) throw std::invalid_argument("blf_support: operator index out of range");
    const int dim = s.dim();
    PointCloud pc;
    pc.dim = dim;
    pc.word = word;

    BoundedSequence c = BoundedSequence::delta(dim);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(dim, dim);
    int steps = 0;
    for (size_t k = size_t(shift) - 1; k < word.size(); ++k) {
        c = apply_subdivision(s.ops[word[k]], c);
        q = q * to_eigen(s.ops[word[k]].dilation.inverse());
        ++steps;
        if (c.deviation().size() > max_points)
            throw std::invalid_argument("blf_support: support exceeded the point budget");
    }
    pc.depth = steps;
    for (const auto& [p, v] : c.deviation()) {
        Eigen::VectorXd x(dim);
        for (int i = 0; i < dim; ++i) x(i) = double(p[size_t(i)]);
        Eigen::VectorXd y = q * x;
        std::vector<double> row(size_t(dim), 0.0);
        for (int i = 0; i < dim; ++i) row[size_t(i)] = y(i);
        pc.points.push_back(std::move(row));
        pc.values.push_back(v.to_double());
    }
    detail::canonical_sort(pc);
    return pc;
}

} // namespace msubdiv
