#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <optional>

#include "msubdiv/lattice.hpp"
#include "msubdiv/matrix.hpp"

namespace msubdiv {

inline Eigen::MatrixXd to_eigen(const RatMatrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) e(i, j) = m(i, j).to_double();
    return e;
}

inline Eigen::MatrixXd to_eigen(const IntMatrix& m) { return to_eigen(m.to_rational()); }

inline double spectral_radius(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double operator_norm_2(const Eigen::MatrixXd& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()(0);
}

inline double operator_norm_inf(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 0.0;
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

struct RealEigenPair {
    double value = 0;          // the dominant eigenvalue (may be negative)
    Eigen::VectorXd vector;
};

/// Dominant eigenpair when the leading eigenvalue is real; nullopt when the
/// spectral radius is attained only by a complex pair.
inline std::optional<RealEigenPair> leading_real_eigenpair(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return std::nullopt;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    const auto& vals = es.eigenvalues();
    int best = -1;
    double rho = -1;
    for (int i = 0; i < vals.size(); ++i) {
        double m = std::abs(vals(i));
        if (m > rho) {
            rho = m;
            best = i;
        }
    }
    if (best < 0) return std::nullopt;
    if (std::abs(vals(best).imag()) > 1e-9 * (1.0 + rho)) return std::nullopt;
    RealEigenPair p;
    p.value = vals(best).real();
    p.vector = es.eigenvectors().col(best).real();
    double n = p.vector.cwiseAbs().maxCoeff();
    if (n <= 0) return std::nullopt;
    p.vector /= n;
    // Canonical sign: first component of largest magnitude is positive.
    for (int i = 0; i < p.vector.size(); ++i)
        if (std::abs(p.vector(i)) > 0.5) {
            if (p.vector(i) < 0) p.vector = -p.vector;
            break;
        }
    return p;
}

/// Exact test sigma_max(P) < 1 for a rational matrix: I - P^T P positive
/// definite, decided in rational arithmetic.
inline bool norm2_strictly_below_one(const RatMatrix& p) {
    RatMatrix g = RatMatrix::identity(p.cols()) - p.transpose() * p;
    return g.positive_definite();
}

/// Exact test norm2(M^{-1}) < 1 for an integer matrix: M^T M - I positive
/// definite (equivalently sigma_min(M) > 1).
inline bool inverse_norm2_strictly_below_one(const IntMatrix& m) {
    RatMatrix g = m.transpose().to_rational() * m.to_rational() - RatMatrix::identity(m.dim());
    return g.positive_definite();
}

} // namespace msubdiv
