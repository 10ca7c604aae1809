#pragma once

// Small fixed-size real linear algebra used throughout: 3x3 SVD with
// orientation control, tolerance-based numerical rank, scalar triple
// products, and characteristic-polynomial coefficients.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace luq {

using RVec3 = Eigen::Vector3d;
using RMat3 = Eigen::Matrix3d;

/// Result of a full 3x3 singular value decomposition,
/// input = left * diag(sigma) * right^T with sigma sorted descending.
struct Svd3Result {
    RMat3 left;
    RVec3 sigma;
    RMat3 right;

    RMat3 reconstruct() const { return left * sigma.asDiagonal() * right.transpose(); }
};

inline bool is_finite(const RMat3& m) { return m.allFinite(); }
inline bool is_finite(const RVec3& v) { return v.allFinite(); }

/// Full SVD of a real 3x3 matrix. Factors are orthogonal (det may be -1),
/// singular values nonnegative and sorted descending. Deterministic for a
/// fixed input.
inline Svd3Result svd3(const RMat3& m) {
    if (!m.allFinite()) {
        throw std::invalid_argument("svd3: non-finite input");
    }
    Eigen::JacobiSVD<RMat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return Svd3Result{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Flip signs in the factors of an SVD so that det(left) = det(right) = +1,
/// without changing the reconstruction. A paired column flip fixes the case
/// where both determinants are negative; a single flip on a column whose
/// singular value is (near) zero fixes a lone negative determinant. Returns
/// none when the determinants differ and every singular value is nonzero.
inline std::optional<Svd3Result> svd3_proper(const Svd3Result& s, double zero_tol = 1e-12) {
    Svd3Result r = s;
    const bool neg_left = r.left.determinant() < 0.0;
    const bool neg_right = r.right.determinant() < 0.0;
    if (neg_left && neg_right) {
        r.left.col(2) = -r.left.col(2);
        r.right.col(2) = -r.right.col(2);
        return r;
    }
    if (neg_left != neg_right) {
        for (int i = 2; i >= 0; --i) {
            if (r.sigma(i) <= zero_tol) {
                if (neg_left) {
                    r.left.col(i) = -r.left.col(i);
                } else {
                    r.right.col(i) = -r.right.col(i);
                }
                return r;
            }
        }
        return std::nullopt;
    }
    return r;
}

/// Numerical rank of a list of 3-vectors: the number of singular values of
/// the stacked matrix exceeding tol_rel * max(1, sigma_max).
inline int rank_tol(const std::vector<RVec3>& vs, double tol_rel = 1e-8) {
    if (vs.empty()) {
        throw std::invalid_argument("rank_tol: empty vector list");
    }
    if (tol_rel <= 0.0) {
        throw std::invalid_argument("rank_tol: tol_rel must be positive");
    }
    Eigen::MatrixXd stacked(static_cast<Eigen::Index>(vs.size()), 3);
    for (size_t i = 0; i < vs.size(); ++i) {
        stacked.row(static_cast<Eigen::Index>(i)) = vs[i].transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) {
        return 0;
    }
    const double cutoff = tol_rel * std::max(1.0, sv(0));
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) {
            ++rank;
        }
    }
    return rank;
}

/// Scalar triple product <a, b x c>, i.e. det[a b c].
inline double triple(const RVec3& a, const RVec3& b, const RVec3& c) {
    return a.dot(b.cross(c));
}

/// Coefficients (c2, c1, c0) such that m^3 = c2*m^2 + c1*m + c0*I for a
/// symmetric 3x3 matrix: c2 = tr m, c1 = -(tr^2 m - tr m^2)/2, c0 = det m.
inline std::array<double, 3> char_poly3(const RMat3& m) {
    const double scale = std::max(1.0, m.norm());
    if ((m - m.transpose()).norm() > 1e-8 * scale) {
        throw std::invalid_argument("char_poly3: input is not symmetric");
    }
    const double tr = m.trace();
    const double tr2 = (m * m).trace();
    return {tr, -(tr * tr - tr2) / 2.0, m.determinant()};
}

}  // namespace luq
