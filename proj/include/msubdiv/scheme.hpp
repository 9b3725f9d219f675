#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msubdiv/lattice.hpp"
#include "msubdiv/rational.hpp"
#include "msubdiv/spectral.hpp"

namespace msubdiv {

/// Finitely supported mask. Only nonzero coefficients are stored; the key set
/// is exactly the support.
class Mask {
public:
    Mask(int dim, std::map<Point, Rational> coeffs) : dim_(dim) {
        if (dim < 1) throw std::invalid_argument("Mask: dimension must be >= 1");
        for (auto& [p, v] : coeffs) {
            if (int(p.size()) != dim) throw std::invalid_argument("Mask: point dimension mismatch");
            if (!v.is_zero()) coef_.emplace(p, v);
        }
        if (coef_.empty()) throw std::invalid_argument("Mask: empty support");
    }

    int dim() const { return dim_; }
    const std::map<Point, Rational>& coefficients() const { return coef_; }

    Rational at(const Point& p) const {
        auto it = coef_.find(p);
        return it == coef_.end() ? Rational(0) : it->second;
    }

    LatticeSet support() const {
        std::vector<Point> pts;
        pts.reserve(coef_.size());
        for (const auto& [p, v] : coef_) pts.push_back(p);
        return LatticeSet(dim_, std::move(pts));
    }

    bool origin_in_support() const { return coef_.count(Point(dim_, 0)) > 0; }

    bool nonnegative() const {
        for (const auto& [p, v] : coef_)
            if (v.sign() < 0) return false;
        return true;
    }

    bool operator==(const Mask& o) const { return dim_ == o.dim_ && coef_ == o.coef_; }

private:
    int dim_;
    std::map<Point, Rational> coef_;
};

/// One subdivision rule: mask, dilation and a verified digit set.
struct SubdivisionOp {
    SubdivisionOp(std::string label_, Mask mask_, IntMatrix dilation_,
                  std::optional<LatticeSet> digits_ = std::nullopt)
        : label(std::move(label_)),
          mask(std::move(mask_)),
          dilation(std::move(dilation_)),
          digits(digits_ ? std::move(*digits_) : digit_set(dilation)) {
        if (mask.dim() != dilation.dim() || digits.dim() != dilation.dim())
            throw std::invalid_argument("SubdivisionOp: dimension mismatch");
        if (std::llabs(dilation.det()) < 2)
            throw std::invalid_argument("SubdivisionOp \"" + label +
                                        "\": |det M| >= 2 required for a dilation");
        if (!verify_digit_set(dilation, digits))
            throw std::invalid_argument("SubdivisionOp \"" + label +
                                        "\": digits are not a complete residue set");
    }

    int dim() const { return dilation.dim(); }

    bool operator==(const SubdivisionOp& o) const {
        return label == o.label && mask == o.mask && dilation == o.dilation && digits == o.digits;
    }

    std::string label;
    Mask mask;
    IntMatrix dilation;
    LatticeSet digits;
};

/// The finite operator family the convergence question is asked about.
struct SchemeSet {
    explicit SchemeSet(std::vector<SubdivisionOp> ops_) : ops(std::move(ops_)) {
        if (ops.empty()) throw std::invalid_argument("SchemeSet: at least one operator required");
        for (const auto& op : ops)
            if (op.dim() != ops.front().dim())
                throw std::invalid_argument("SchemeSet: operators disagree on dimension");
    }

    int dim() const { return ops.front().dim(); }
    size_t count() const { return ops.size(); }

    bool operator==(const SchemeSet& o) const { return ops == o.ops; }

    std::vector<SubdivisionOp> ops;
};

/// Sequence with a constant background plus a finitely supported deviation.
/// value(p) = background + deviation(p). The deviation is kept as a sorted
/// flat array; iteration supports run into the millions of points.
class BoundedSequence {
public:
    using Entry = std::pair<Point, Rational>;

    explicit BoundedSequence(int dim, Rational background = Rational(0))
        : dim_(dim), background_(background) {
        if (dim < 1) throw std::invalid_argument("BoundedSequence: dimension must be >= 1");
    }

    static BoundedSequence delta(int dim) {
        BoundedSequence c(dim);
        c.set(Point(dim, 0), Rational(1));
        return c;
    }

    int dim() const { return dim_; }
    const Rational& background() const { return background_; }
    const std::vector<Entry>& deviation() const { return dev_; }

    Rational at(const Point& p) const {
        auto it = find(p);
        return it == dev_.end() ? background_ : background_ + it->second;
    }

    void set(const Point& p, const Rational& value) {
        if (int(p.size()) != dim_)
            throw std::invalid_argument("BoundedSequence: point dimension mismatch");
        Rational d = value - background_;
        auto it = std::lower_bound(dev_.begin(), dev_.end(), p, key_less);
        if (it != dev_.end() && it->first == p) {
            if (d.is_zero())
                dev_.erase(it);
            else
                it->second = d;
        } else if (!d.is_zero()) {
            dev_.insert(it, {p, d});
        }
    }

    void add_deviation(const Point& p, const Rational& d) {
        if (d.is_zero()) return;
        auto it = std::lower_bound(dev_.begin(), dev_.end(), p, key_less);
        if (it != dev_.end() && it->first == p) {
            it->second += d;
            if (it->second.is_zero()) dev_.erase(it);
        } else {
            dev_.insert(it, {p, d});
        }
    }

    /// Bulk append; keys must arrive in strictly increasing order.
    void append_sorted(Point&& p, Rational&& d) {
        dev_.emplace_back(std::move(p), std::move(d));
    }

    void reserve(size_t n) { dev_.reserve(n); }

    LatticeSet deviation_support() const {
        std::vector<Point> pts;
        pts.reserve(dev_.size());
        for (const auto& [p, v] : dev_) pts.push_back(p);
        return LatticeSet(dim_, std::move(pts));
    }

    bool operator==(const BoundedSequence& o) const {
        return dim_ == o.dim_ && background_ == o.background_ && dev_ == o.dev_;
    }

private:
    static bool key_less(const Entry& e, const Point& p) { return e.first < p; }

    std::vector<Entry>::const_iterator find(const Point& p) const {
        auto it = std::lower_bound(dev_.begin(), dev_.end(), p, key_less);
        return it != dev_.end() && it->first == p ? it : dev_.end();
    }

    int dim_;
    Rational background_;
    std::vector<Entry> dev_;
};

namespace detail {

// Bias-packed lattice point, lexicographic order preserved: one unsigned
// 32-bit field per coordinate, most significant first. Valid for dimensions
// up to four and |coordinate| < 2^31.
inline unsigned __int128 pack_point(const Point& p) {
    unsigned __int128 key = 0;
    for (Coord c : p) key = (key << 32) | uint32_t(c + 2147483648LL);
    return key;
}

inline Point unpack_point(unsigned __int128 key, int dim) {
    Point p(size_t(dim), 0);
    for (int i = dim - 1; i >= 0; --i) {
        p[size_t(i)] = Coord(uint32_t(key & 0xffffffffu)) - 2147483648LL;
        key >>= 32;
    }
    return p;
}

} // namespace detail

struct SumRuleReport {
    bool ok = false;
    // digit -> coset sum minus one
    std::vector<std::pair<Point, Rational>> residuals;
};

/// Coset sums of the mask against the digit set: sum_beta a(M beta + d) must
/// equal 1 for every digit d.
inline SumRuleReport check_sum_rules(const SubdivisionOp& op) {
    SumRuleReport rep;
    std::map<Point, Rational> sums;
    for (const Point& d : op.digits.points()) sums.emplace(d, Rational(0));
    for (const auto& [p, v] : op.mask.coefficients()) {
        bool matched = false;
        for (const Point& d : op.digits.points()) {
            if (detail::rational_preimage(op.dilation, point_sub(p, d))) {
                sums[d] += v;
                matched = true;
                break;
            }
        }
        if (!matched)
            throw std::logic_error("check_sum_rules: support point " + point_str(p) +
                                   " matched no digit coset");
    }
    rep.ok = true;
    for (const Point& d : op.digits.points()) {
        Rational res = sums[d] - Rational(1);
        rep.residuals.emplace_back(d, res);
        if (!res.is_zero()) rep.ok = false;
    }
    return rep;
}

inline bool all_sum_rules_hold(const SchemeSet& s) {
    for (const auto& op : s.ops)
        if (!check_sum_rules(op).ok) return false;
    return true;
}

/// S c(alpha) = sum_beta a(alpha - M beta) c(beta), exact in rationals.
/// A nonzero constant background requires the sum rules (constants reproduce
/// exactly, so the background passes through unchanged). Contributions are
/// sorted and merged in one pass; supports at depth ten and beyond run in the
/// millions of points.
inline BoundedSequence apply_subdivision(const SubdivisionOp& op, const BoundedSequence& c) {
    if (op.dim() != c.dim()) throw std::invalid_argument("apply_subdivision: dimension mismatch");
    if (!c.background().is_zero() && !check_sum_rules(op).ok)
        throw std::invalid_argument(
            "apply_subdivision: constant background requires a sum-rule mask");
    const int dim = c.dim();
    BoundedSequence out(dim, c.background());
    if (dim <= 4) {
        // packed-key path: flat integer sorts carry million-point supports
        std::vector<std::pair<unsigned __int128, Rational>> contrib;
        contrib.reserve(c.deviation().size() * op.mask.coefficients().size());
        for (const auto& [beta, vb] : c.deviation()) {
            Point mb = op.dilation.apply(beta);
            for (const auto& [sigma, va] : op.mask.coefficients()) {
                unsigned __int128 key = 0;
                for (int i = 0; i < dim; ++i)
                    key = (key << 32) | uint32_t(mb[size_t(i)] + sigma[size_t(i)] + 2147483648LL);
                contrib.emplace_back(key, va * vb);
            }
        }
        std::sort(contrib.begin(), contrib.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        out.reserve(contrib.size());
        size_t i = 0;
        while (i < contrib.size()) {
            Rational v = std::move(contrib[i].second);
            size_t j = i + 1;
            while (j < contrib.size() && contrib[j].first == contrib[i].first) {
                v += contrib[j].second;
                ++j;
            }
            if (!v.is_zero()) out.append_sorted(detail::unpack_point(contrib[i].first, dim),
                                                std::move(v));
            i = j;
        }
        return out;
    }
    std::vector<std::pair<Point, Rational>> contrib;
    contrib.reserve(c.deviation().size() * op.mask.coefficients().size());
    for (const auto& [beta, vb] : c.deviation()) {
        Point mb = op.dilation.apply(beta);
        for (const auto& [sigma, va] : op.mask.coefficients())
            contrib.emplace_back(point_add(mb, sigma), va * vb);
    }
    std::sort(contrib.begin(), contrib.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out.reserve(contrib.size());
    size_t i = 0;
    while (i < contrib.size()) {
        Rational v = std::move(contrib[i].second);
        size_t j = i + 1;
        while (j < contrib.size() && contrib[j].first == contrib[i].first) {
            v += contrib[j].second;
            ++j;
        }
        if (!v.is_zero()) out.append_sorted(std::move(contrib[i].first), std::move(v));
        i = j;
    }
    return out;
}

/// Composition: apply `inner` first, then `outer`. The result has dilation
/// M_outer * M_inner and mask b(delta) = sum_gamma a_outer(delta - M_outer
/// gamma) a_inner(gamma); digits are recomputed for the composed dilation.
inline SubdivisionOp compose(const SubdivisionOp& outer, const SubdivisionOp& inner) {
    if (outer.dim() != inner.dim()) throw std::invalid_argument("compose: dimension mismatch");
    std::map<Point, Rational> b;
    for (const auto& [gamma, vi] : inner.mask.coefficients()) {
        Point mg = outer.dilation.apply(gamma);
        for (const auto& [sigma, vo] : outer.mask.coefficients()) {
            Point delta = point_add(mg, sigma);
            auto it = b.find(delta);
            if (it == b.end())
                b.emplace(delta, vo * vi);
            else
                it->second += vo * vi;
        }
    }
    return SubdivisionOp(outer.label + "*" + inner.label, Mask(outer.dim(), std::move(b)),
                         outer.dilation * inner.dilation);
}

/// All J^n ordered n-fold compositions; label "jn*...*j1" records the word
/// (rightmost factor applied first).
inline SchemeSet power_scheme_set(const SchemeSet& s, int n, size_t cap = 64) {
    if (n < 1) throw std::invalid_argument("power_scheme_set: n must be >= 1");
    if (n == 1) return s;
    double total = std::pow(double(s.count()), double(n));
    if (total > double(cap))
        throw std::invalid_argument("power_scheme_set: J^n = " + std::to_string(size_t(total)) +
                                    " exceeds cap " + std::to_string(cap));
    std::vector<SubdivisionOp> out;
    std::vector<size_t> word(n, 0);
    for (;;) {
        SubdivisionOp composed = s.ops[word[0]];
        for (int k = 1; k < n; ++k) composed = compose(s.ops[word[k]], composed);
        out.push_back(std::move(composed));
        int i = n - 1;
        while (i >= 0 && ++word[i] == s.count()) {
            word[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
    return SchemeSet(std::move(out));
}

struct AssumptionNEntry {
    std::string label;
    bool ok = false;     // exact decision: sigma_max(M^{-1}) < 1
    double norm2 = 0.0;  // numeric value for reporting
};

inline std::vector<AssumptionNEntry> check_assumption_n(const SchemeSet& s) {
    std::vector<AssumptionNEntry> out;
    for (const auto& op : s.ops) {
        AssumptionNEntry e;
        e.label = op.label;
        e.ok = inverse_norm2_strictly_below_one(op.dilation);
        e.norm2 = operator_norm_2(to_eigen(op.dilation.inverse()));
        out.push_back(std::move(e));
    }
    return out;
}

/// Smallest n such that every n-fold dilation product satisfies
/// norm2(product^{-1}) < 1 exactly; nullopt if none up to max_n.
inline std::optional<int> smallest_assumption_n_power(const SchemeSet& s, int max_n = 6,
                                                      size_t cap = 4096) {
    const size_t j = s.count();
    for (int n = 1; n <= max_n; ++n) {
        double total = std::pow(double(j), double(n));
        if (total > double(cap)) break;
        bool all_ok = true;
        std::vector<size_t> word(n, 0);
        for (;;) {
            IntMatrix p = s.ops[word[0]].dilation;
            for (int k = 1; k < n; ++k) p = s.ops[word[k]].dilation * p;
            if (!inverse_norm2_strictly_below_one(p)) {
                all_ok = false;
                break;
            }
            int i = n - 1;
            while (i >= 0 && ++word[i] == j) {
                word[i] = 0;
                --i;
            }
            if (i < 0) break;
        }
        if (all_ok) return n;
    }
    return std::nullopt;
}

enum class Expansion { certified_yes, certified_no, inconclusive };

struct ExpansionReport {
    Expansion verdict = Expansion::inconclusive;
    int depth = 0;             // product length that decided the verdict
    std::vector<int> witness;  // operator indices of the deciding product
    double witness_value = 0;  // norm (yes) or spectral radius (no)
};

/// Joint expansion of the dilation family. certified-yes: for some k <= depth
/// every length-k product of inverses has 2-norm below 1 (exact test);
/// certified-no: some product of inverses has spectral radius >= 1.
inline ExpansionReport check_jointly_expanding(const SchemeSet& s, int depth = 4,
                                               size_t cap = 4096) {
    if (depth < 1) throw std::invalid_argument("check_jointly_expanding: depth must be >= 1");
    ExpansionReport rep;
    const size_t j = s.count();
    std::vector<RatMatrix> inverses;
    inverses.reserve(j);
    for (const auto& op : s.ops) inverses.push_back(op.dilation.inverse());

    for (int k = 1; k <= depth; ++k) {
        double total = std::pow(double(j), double(k));
        if (total > double(cap)) break;
        bool all_below_one = true;
        std::vector<int> worst_word;
        std::vector<size_t> word(k, 0);
        for (;;) {
            RatMatrix p = inverses[word[0]];
            for (int i = 1; i < k; ++i) p = inverses[word[i]] * p;
            double rho = spectral_radius(to_eigen(p));
            if (rho >= 1.0 - 1e-12) {
                rep.verdict = Expansion::certified_no;
                rep.depth = k;
                rep.witness.assign(word.begin(), word.end());
                rep.witness_value = rho;
                return rep;
            }
            if (all_below_one && !norm2_strictly_below_one(p)) {
                all_below_one = false;
                worst_word.assign(word.begin(), word.end());
            }
            int i = k - 1;
            while (i >= 0 && ++word[i] == j) {
                word[i] = 0;
                --i;
            }
            if (i < 0) break;
        }
        if (all_below_one) {
            rep.verdict = Expansion::certified_yes;
            rep.depth = k;
            return rep;
        }
        rep.witness = worst_word;
        rep.depth = k;
    }
    rep.verdict = Expansion::inconclusive;
    return rep;
}

} // namespace msubdiv
