#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "msubdiv/spectral.hpp"

namespace msubdiv {

/// Finite family of real square matrices, the object of the JSR bracketing.
struct MatrixFamily {
    std::vector<Eigen::MatrixXd> mats;
    std::vector<std::string> labels;

    int dim() const { return mats.empty() ? 0 : int(mats.front().rows()); }
    size_t count() const { return mats.size(); }

    void validate() const {
        if (mats.size() != labels.size())
            throw std::invalid_argument("MatrixFamily: label count mismatch");
        for (const auto& m : mats)
            if (m.rows() != m.cols() || m.rows() != dim())
                throw std::invalid_argument("MatrixFamily: non-uniform matrix dimensions");
    }
};

enum class JsrStatus { exact, exact_polytope, bracket, inconclusive };

inline const char* to_string(JsrStatus s) {
    switch (s) {
        case JsrStatus::exact: return "exact";
        case JsrStatus::exact_polytope: return "exact-polytope";
        case JsrStatus::bracket: return "bracket";
        case JsrStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

struct JsrEstimate {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    std::vector<int> word;  // indices into the family; product applies right-to-left
    JsrStatus status = JsrStatus::inconclusive;
    int upper_depth = 0;        // max word length examined by the norm search
    int polytope_vertices = 0;  // vertex count of the certifying polytope, if any
    bool budget_exhausted = false;
};

struct JsrBudget {
    int lower_max_len = 6;
    int upper_max_len = 8;
    long node_budget = 8000000;  // work units (one unit ~ a 12x12 matrix product)
    int polytope_max_vertices = 600;
    int polytope_max_dim = 24;  // above this the LP-based polytope is skipped
    int threads = 1;
};

namespace detail {

/// product(word) = A_{w_0} * A_{w_1} * ... * A_{w_{k-1}}.
inline Eigen::MatrixXd word_product(const MatrixFamily& f, const std::vector<int>& word) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(f.dim(), f.dim());
    for (int s : word) p = p * f.mats[size_t(s)];
    return p;
}

/// Lexicographically minimal among all rotations (necklace representative);
/// cyclic rotations share the product spectral radius.
inline bool is_canonical_necklace(const std::vector<int>& w) {
    const size_t k = w.size();
    for (size_t s = 1; s < k; ++s) {
        for (size_t i = 0; i < k; ++i) {
            int a = w[(i + s) % k], b = w[i];
            if (a < b) return false;
            if (a > b) break;
        }
    }
    return true;
}

struct LowerSearch {
    const MatrixFamily* f;
    int max_len;
    double best = 0.0;
    std::vector<int> best_word;

    // Prefer larger value; on a float tie prefer the shorter, then
    // lexicographically smaller word (deterministic certificates).
    void offer(double value, const std::vector<int>& word) {
        const double tie = 1e-12 * std::max(1.0, std::abs(best));
        if (value > best + tie) {
            best = value;
            best_word = word;
            return;
        }
        if (value >= best - tie && !best_word.empty()) {
            if (word.size() < best_word.size() ||
                (word.size() == best_word.size() && word < best_word)) {
                best_word = word;
            }
        }
    }

    void dfs(std::vector<int>& word, const Eigen::MatrixXd& prefix) {
        if (!word.empty() && is_canonical_necklace(word)) {
            double rho = spectral_radius(prefix);
            if (rho > 0) offer(std::pow(rho, 1.0 / double(word.size())), word);
        }
        if (int(word.size()) == max_len) return;
        for (size_t s = 0; s < f->count(); ++s) {
            word.push_back(int(s));
            dfs(word, prefix * f->mats[s]);
            word.pop_back();
        }
    }
};

inline void merge_lower(LowerSearch& into, const LowerSearch& from) {
    if (!from.best_word.empty()) into.offer(from.best, from.best_word);
}

} // namespace detail

struct LowerBound {
    double value = 0.0;
    std::vector<int> word;
};

/// max over words w, |w| <= max_len, of rho(product(w))^{1/|w|}.
inline LowerBound jsr_lower_bound(const MatrixFamily& f, int max_len, int threads = 1) {
    f.validate();
    if (f.dim() == 0) return {0.0, {}};
    if (max_len < 1) throw std::invalid_argument("jsr_lower_bound: max_len must be >= 1");
    detail::LowerSearch total{&f, max_len, 0.0, {}};
    if (threads > 1 && f.count() > 1) {
        std::vector<std::future<detail::LowerSearch>> futs;
        for (size_t s = 0; s < f.count(); ++s)
            futs.push_back(std::async(std::launch::async, [&f, max_len, s]() {
                detail::LowerSearch ls{&f, max_len, 0.0, {}};
                std::vector<int> word{int(s)};
                ls.dfs(word, f.mats[s]);
                return ls;
            }));
        for (auto& fu : futs) {
            detail::LowerSearch ls = fu.get();
            detail::merge_lower(total, ls);
        }
    } else {
        std::vector<int> word;
        total.dfs(word, Eigen::MatrixXd::Identity(f.dim(), f.dim()));
    }
    return {total.best, total.best_word};
}

enum class NormKind { inf, two };

inline double family_norm(const Eigen::MatrixXd& m, NormKind k) {
    return k == NormKind::inf ? operator_norm_inf(m) : operator_norm_2(m);
}

struct UpperBound {
    double value = std::numeric_limits<double>::infinity();
    int depth = 0;
    bool complete = true;  // false when the work budget cut the search short
};

namespace detail {

/// Work charged per matrix product, normalized so one unit is roughly a
/// 12x12 multiply.
inline long product_work(int n) { return std::max(1L, long(n) * n * n / 1728); }

struct LevelMax {
    const MatrixFamily* f;
    NormKind norm;
    int target;
    double sigma = 0.0;

    void dfs(int len, const Eigen::MatrixXd& prefix) {
        if (len == target) {
            sigma = std::max(sigma, family_norm(prefix, norm));
            return;
        }
        for (const auto& m : f->mats) dfs(len + 1, prefix * m);
    }
};

/// Certified upper bound on ||P||_2: lambda_max(G)^{2^-s} <= ||G^{2^s}||_inf^{2^-s}
/// for G = P^T P, so repeated squaring sharpens the row-sum bound.
inline double norm2_certified_upper(const Eigen::MatrixXd& p, int squarings = 2) {
    Eigen::MatrixXd g = p.transpose() * p;
    double e = 1.0;
    for (int i = 0; i < squarings; ++i) {
        g = g * g;
        e *= 0.5;
    }
    return std::sqrt(std::pow(operator_norm_inf(g), e));
}

struct CutLeaf {
    double value;  // certified ||P||_2^{1/len}, an upper bound
    int len;
    Eigen::MatrixXd prod;
    bool operator<(const CutLeaf& o) const {
        if (value != o.value) return value < o.value;
        return len > o.len;  // prefer shorter words among ties
    }
};

/// Floor-pruned worst-first refinement of a complete prefix-free cut of the
/// word tree. Any complete cut gives JSR <= max_u ||P_u||_2^{1/|u|}; leaves
/// whose certified value drops to `target` are final and need no expansion.
/// Returns `target` when the queue empties (certified), otherwise the best
/// valid cut bound reached within the budget.
inline double certify_below(const MatrixFamily& f, double target, long work_budget, long& work,
                            int& max_depth, size_t queue_cap = 200000) {
    const long unit = product_work(f.dim());
    std::priority_queue<CutLeaf> q;
    for (const auto& m : f.mats) {
        work += unit;
        double v = norm2_certified_upper(m);
        if (v > target) q.push({v, 1, m});
    }
    while (!q.empty()) {
        double bound = std::max(target, q.top().value);
        if (work + long(f.count()) * unit * 4 > work_budget) return bound;
        if (q.top().len >= 64 || q.size() + f.count() > queue_cap) return bound;
        CutLeaf leaf = q.top();
        q.pop();
        max_depth = std::max(max_depth, leaf.len + 1);
        for (const auto& m : f.mats) {
            Eigen::MatrixXd child = leaf.prod * m;
            work += unit * 4;  // product plus the squared-Gram certificate
            double v = std::pow(norm2_certified_upper(child), 1.0 / double(leaf.len + 1));
            if (v > target) q.push({v, leaf.len + 1, std::move(child)});
        }
    }
    return target;
}

} // namespace detail

/// min over k <= max_len of (max_{|w|=k} ||product(w)||)^{1/k}, with memoized
/// prefix products, within a per-phase work budget. When the level formula
/// stays at or above one (or a lower-bound hint asks for a tighter bracket), a
/// floor-pruned cut refinement attempts to certify smaller thresholds with a
/// fresh budget of the same size.
inline UpperBound jsr_upper_bound(const MatrixFamily& f, int max_len,
                                  NormKind norm = NormKind::inf, long work_budget = 8000000,
                                  double hint_lower = -1.0) {
    f.validate();
    if (f.dim() == 0) return {0.0, 0, true};
    if (max_len < 1) throw std::invalid_argument("jsr_upper_bound: max_len must be >= 1");
    UpperBound ub;
    const long unit = detail::product_work(f.dim());
    long work = 0;
    const double m = double(f.count());
    for (int k = 1; k <= max_len; ++k) {
        double level_nodes = m > 1 ? (std::pow(m, k + 1) - m) / (m - 1) : double(k);
        if (work + long(level_nodes) * unit > work_budget) {
            ub.complete = false;
            break;
        }
        detail::LevelMax lm{&f, norm, k};
        lm.dfs(0, Eigen::MatrixXd::Identity(f.dim(), f.dim()));
        work += long(level_nodes) * unit;
        double val = std::pow(lm.sigma, 1.0 / double(k));
        if (val < ub.value) {
            ub.value = val;
            ub.depth = k;
        }
    }
    std::vector<double> targets;
    if (ub.value >= 1.0) targets.push_back(1.0 - 1e-9);
    if (hint_lower > 0 && hint_lower * 1.05 < std::min(ub.value, 1.0 - 1e-9))
        targets.push_back(hint_lower * 1.05);
    long refine_work = 0;  // separate pool: keeps the bound monotone in max_len
    for (double target : targets) {
        if (target >= ub.value) continue;
        int depth = ub.depth;
        double reached = detail::certify_below(f, target, work_budget, refine_work, depth);
        if (reached < ub.value) {
            ub.value = reached;
            ub.depth = std::max(ub.depth, depth);
        }
        if (reached > target) break;  // budget ran out; tighter targets are hopeless
    }
    return ub;
}

namespace detail {

/// min c.x subject to A x = b, x >= 0 (dense two-phase simplex, Bland's rule).
/// Returns +inf when infeasible.
inline double simplex_min(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c) {
    const int m = int(a.rows());
    const int n = int(a.cols());
    for (int i = 0; i < m; ++i)
        if (b(i) < 0) {
            a.row(i) = -a.row(i);
            b(i) = -b(i);
        }
    // tableau: columns [x | artificials | rhs]
    Eigen::MatrixXd t(m + 1, n + m + 1);
    t.setZero();
    t.block(0, 0, m, n) = a;
    t.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
    t.block(0, n + m, m, 1) = b;
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    auto price_out = [&](const Eigen::VectorXd& cost, int ncols) {
        t.row(m).setZero();
        t.row(m).head(ncols) = cost.transpose();
        for (int i = 0; i < m; ++i)
            if (basis[i] < ncols && cost(basis[i]) != 0.0)
                t.row(m) -= cost(basis[i]) * t.row(i);
    };
    auto iterate = [&](int ncols) {
        const double eps = 1e-11;
        for (int iter = 0; iter < 20000; ++iter) {
            int enter = -1;
            for (int j = 0; j < ncols; ++j)
                if (t(m, j) < -eps) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            double best_ratio = 0;
            for (int i = 0; i < m; ++i) {
                if (t(i, enter) <= eps) continue;
                double ratio = t(i, n + m) / t(i, enter);
                if (leave < 0 || ratio < best_ratio - eps ||
                    (ratio < best_ratio + eps && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return false;  // unbounded
            t.row(leave) /= t(leave, enter);
            for (int i = 0; i <= m; ++i) {
                if (i == leave) continue;
                double f = t(i, enter);
                if (f != 0.0) t.row(i) -= f * t.row(leave);
            }
            basis[leave] = enter;
        }
        return false;
    };

    // Phase 1: drive artificials to zero.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
    phase1.tail(m).setOnes();
    price_out(phase1, n + m);
    if (!iterate(n + m)) return std::numeric_limits<double>::infinity();
    if (t(m, n + m) < -1e-7) return std::numeric_limits<double>::infinity();  // infeasible
    // Pivot remaining artificials out where possible.
    for (int i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        int enter = -1;
        for (int j = 0; j < n; ++j)
            if (std::abs(t(i, j)) > 1e-9) {
                enter = j;
                break;
            }
        if (enter < 0) continue;  // redundant row
        t.row(i) /= t(i, enter);
        for (int r = 0; r <= m; ++r) {
            if (r == i) continue;
            double f = t(r, enter);
            if (f != 0.0) t.row(r) -= f * t.row(i);
        }
        basis[i] = enter;
    }
    // Phase 2 on the original costs; lock artificial columns.
    for (int i = 0; i < m; ++i) t.col(n + i).setZero();
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
    phase2.head(n) = c;
    price_out(phase2, n + m);
    if (!iterate(n)) return std::numeric_limits<double>::infinity();
    double obj = 0;
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) obj += c(basis[i]) * t(i, n + m);
    return obj;
}

/// x in absconv{+-v_1, ..., +-v_k}: min sum |lambda| with V lambda = x stays <= 1.
inline bool in_symmetric_hull(const std::vector<Eigen::VectorXd>& verts, const Eigen::VectorXd& x,
                              double tol) {
    if (verts.empty()) return x.cwiseAbs().maxCoeff() <= tol;
    const int n = int(x.size());
    const int k = int(verts.size());
    Eigen::MatrixXd a(n, 2 * k);
    for (int j = 0; j < k; ++j) {
        a.col(j) = verts[size_t(j)];
        a.col(k + j) = -verts[size_t(j)];
    }
    double opt = simplex_min(a, x, Eigen::VectorXd::Ones(2 * k));
    return opt <= 1.0 + tol;
}

} // namespace detail

struct PolytopeResult {
    bool certified = false;
    double value = 0.0;
    int vertex_count = 0;
};

/// Simplified invariant-polytope certification: scale the family by the
/// candidate value, grow a symmetric vertex set from the candidate product's
/// leading eigenvector cycle, and certify when all images fall back into the
/// absolute convex hull and the hull has full dimension.
inline PolytopeResult jsr_polytope(const MatrixFamily& f, const std::vector<int>& word,
                                   int max_vertices = 600, double tol = 1e-9) {
    f.validate();
    PolytopeResult res;
    if (f.dim() == 0) {
        res.certified = true;
        return res;
    }
    if (word.empty()) return res;
    Eigen::MatrixXd p = detail::word_product(f, word);
    auto pair = leading_real_eigenpair(p);
    if (!pair) return res;  // complex leading eigenvalue: bracket fallback
    double rho = std::abs(pair->value);
    if (rho <= 0) return res;
    const double lambda = std::pow(rho, 1.0 / double(word.size()));
    std::vector<Eigen::MatrixXd> scaled;
    scaled.reserve(f.count());
    for (const auto& m : f.mats) scaled.push_back(m / lambda);

    std::vector<Eigen::VectorXd> verts;
    std::deque<Eigen::VectorXd> queue;
    auto offer = [&](const Eigen::VectorXd& v) {
        if (v.cwiseAbs().maxCoeff() < 1e-13) return true;
        if (detail::in_symmetric_hull(verts, v, tol)) return true;
        if (int(verts.size()) >= max_vertices) return false;
        verts.push_back(v);
        queue.push_back(v);
        return true;
    };

    // Eigenvector cycle of the candidate word: the product applies the last
    // symbol first, so walk the word from the back.
    Eigen::VectorXd u = pair->vector;
    if (!offer(u)) return res;
    for (size_t i = word.size(); i-- > 1;) {
        u = scaled[size_t(word[i])] * u;
        if (!offer(u)) return res;
    }

    // Closure; when it stabilizes on a lower-dimensional hull (the family is
    // reducible), complete the basis with the residual of the farthest
    // coordinate axis and keep closing. Certification always re-checks full
    // dimension, so the injected directions cannot weaken the certificate.
    const int n = f.dim();
    for (int injections = 0;; ++injections) {
        while (!queue.empty()) {
            Eigen::VectorXd v = queue.front();
            queue.pop_front();
            for (const auto& b : scaled) {
                if (!offer(b * v)) {
                    res.vertex_count = int(verts.size());
                    return res;  // vertex budget exceeded
                }
            }
        }
        Eigen::MatrixXd vm(n, int(verts.size()));
        for (int j = 0; j < int(verts.size()); ++j) vm.col(j) = verts[size_t(j)];
        if (Eigen::FullPivLU<Eigen::MatrixXd>(vm).rank() == n) break;
        if (injections >= n) {
            res.vertex_count = int(verts.size());
            return res;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vm);
        Eigen::VectorXd best_residual;
        double best_norm = 0;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
            Eigen::VectorXd r = e - vm * qr.solve(e);
            double rn = r.cwiseAbs().maxCoeff();
            if (rn > best_norm) {
                best_norm = rn;
                best_residual = r;
            }
        }
        if (best_norm < 1e-9) {
            res.vertex_count = int(verts.size());
            return res;
        }
        offer(best_residual / best_norm);
    }
    res.vertex_count = int(verts.size());
    res.certified = true;
    res.value = lambda * (1.0 + tol);
    return res;
}

/// Lower bound, then polytope certification on the best word, then the norm
/// upper bound as fallback. Guarantees lower <= upper.
inline JsrEstimate jsr_estimate(const MatrixFamily& f, const JsrBudget& budget = {}) {
    f.validate();
    JsrEstimate est;
    if (f.dim() == 0 || f.count() == 0) {
        est.lower = est.upper = 0.0;
        est.status = JsrStatus::exact;
        return est;
    }
    if (f.count() == 1) {
        // JSR of a singleton is its spectral radius.
        est.lower = est.upper = spectral_radius(f.mats.front());
        est.word = {0};
        est.status = JsrStatus::exact;
        return est;
    }
    LowerBound lb = jsr_lower_bound(f, budget.lower_max_len, budget.threads);
    est.lower = lb.value;
    est.word = lb.word;
    if (est.lower < 1.0 - 1e-12 && !lb.word.empty() && f.dim() <= budget.polytope_max_dim &&
        budget.polytope_max_vertices > 0) {
        PolytopeResult poly = jsr_polytope(f, lb.word, budget.polytope_max_vertices);
        if (poly.certified) {
            est.upper = std::max(poly.value, est.lower);
            est.status = JsrStatus::exact_polytope;
            est.polytope_vertices = poly.vertex_count;
            return est;
        }
        est.polytope_vertices = poly.vertex_count;
    }
    UpperBound ub = jsr_upper_bound(f, budget.upper_max_len, NormKind::inf, budget.node_budget,
                                    est.lower);
    est.upper = std::max(ub.value, est.lower);
    est.upper_depth = ub.depth;
    est.budget_exhausted = !ub.complete;
    est.status = JsrStatus::bracket;
    return est;
}

} // namespace msubdiv
