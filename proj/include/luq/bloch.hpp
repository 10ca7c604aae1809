#pragma once

// Density-matrix <-> Bloch tensor conversion for 2 and 3 qubits, plus the
// 3-qubit unfoldings and Gram matrices.
//
// Conventions fixed here and relied on everywhere else:
//   - sigma_1, sigma_2, sigma_3 are the x, y, z Pauli matrices.
//   - T1^i = tr(rho sigma_i x I), T12^{ij} = tr(rho sigma_i x sigma_j), and
//     so on; all coefficient vectors are columns acted on from the left.
//   - The 3x9 unfolding T1_23 has columns ordered (jk) =
//     (11),(12),(13),(21),(22),(23),(31),(32),(33); T2_13 groups (ik) and
//     T3_12 groups (ij) the same way. This matches the standard Kronecker
//     product, so T1_23 transforms as O1 * T1_23 * (O2 x O3)^t.

#include <array>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "luq/linalg.hpp"
#include "luq/pauli.hpp"

namespace luq {

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;

inline double min_eigenvalue(const CMatX& m) {
    Eigen::SelfAdjointEigenSolver<CMatX> es((m + m.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
}

/// A validated density matrix of dimension 4 (2 qubits) or 8 (3 qubits).
struct DensityMatrix {
    CMatX mat;

    int dim() const { return static_cast<int>(mat.rows()); }
    int qubits() const { return dim() == 4 ? 2 : 3; }

    /// Validates Hermiticity, unit trace, and positivity; throws on failure.
    static DensityMatrix make(CMatX m) {
        if (m.rows() != m.cols() || (m.rows() != 4 && m.rows() != 8)) {
            throw std::invalid_argument("DensityMatrix: dimension must be 4 or 8");
        }
        if (!m.allFinite()) {
            throw std::invalid_argument("DensityMatrix: non-finite entries");
        }
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
            throw std::invalid_argument("DensityMatrix: not Hermitian");
        }
        if (std::abs(m.trace() - std::complex<double>(1.0, 0.0)) > kTraceTol) {
            throw std::invalid_argument("DensityMatrix: trace is not 1");
        }
        if (min_eigenvalue(m) < -kPositivityTol) {
            throw std::invalid_argument("DensityMatrix: negative eigenvalue");
        }
        return DensityMatrix{std::move(m)};
    }
};

struct BlochTensor2 {
    RVec3 t1 = RVec3::Zero();
    RVec3 t2 = RVec3::Zero();
    RMat3 t12 = RMat3::Zero();
};

/// 3-qubit Bloch data; t123 is stored flat with index (i,j,k) -> 9i + 3j + k
/// (all zero-based).
struct BlochTensor3 {
    RVec3 t1 = RVec3::Zero();
    RVec3 t2 = RVec3::Zero();
    RVec3 t3 = RVec3::Zero();
    RMat3 t12 = RMat3::Zero();
    RMat3 t13 = RMat3::Zero();
    RMat3 t23 = RMat3::Zero();
    std::array<double, 27> t123{};

    double t(int i, int j, int k) const { return t123[static_cast<size_t>(9 * i + 3 * j + k)]; }
    double& t(int i, int j, int k) { return t123[static_cast<size_t>(9 * i + 3 * j + k)]; }
};

using Mat39 = Eigen::Matrix<double, 3, 9>;
using Mat99 = Eigen::Matrix<double, 9, 9>;

struct Unfoldings3 {
    Mat39 t1_23, t2_13, t3_12;
    RMat3 cal_t1, cal_t2, cal_t3;       // 3x3 Gram matrices T_{i|jk} T_{i|jk}^t
    Mat99 cal_t23, cal_t13, cal_t12;    // 9x9 Gram matrices T_{i|jk}^t T_{i|jk}
};

/// Hermitian unit-trace matrix rebuilt from Bloch data. Arbitrary tensor
/// data need not be positive; `physical` reports that check instead of
/// enforcing it.
struct BlochReconstruction {
    CMatX mat;
    double min_eig = 0.0;
    bool physical = false;

    DensityMatrix to_density() const {
        if (!physical) {
            throw std::invalid_argument("BlochReconstruction: non-physical Bloch data");
        }
        return DensityMatrix::make(mat);
    }
};

namespace detail {

inline double re_trace_product(const CMatX& rho, const CMatX& op) {
    // tr(rho * op) = sum_{ij} rho_ij op_ji; real for Hermitian pairs.
    return (rho * op).trace().real();
}

inline BlochReconstruction flag_reconstruction(CMatX m) {
    BlochReconstruction r;
    r.min_eig = min_eigenvalue(m);
    r.physical = r.min_eig >= -kPositivityTol;
    r.mat = std::move(m);
    return r;
}

}  // namespace detail

inline BlochTensor2 to_bloch2(const DensityMatrix& rho) {
    if (rho.dim() != 4) {
        throw std::invalid_argument("to_bloch2: expected a 2-qubit state");
    }
    const CMat2 id = CMat2::Identity();
    BlochTensor2 b;
    for (int i = 0; i < 3; ++i) {
        b.t1(i) = detail::re_trace_product(rho.mat, kron(pauli(i + 1), id));
        b.t2(i) = detail::re_trace_product(rho.mat, kron(id, pauli(i + 1)));
        for (int j = 0; j < 3; ++j) {
            b.t12(i, j) = detail::re_trace_product(rho.mat, kron(pauli(i + 1), pauli(j + 1)));
        }
    }
    return b;
}

inline BlochReconstruction from_bloch2(const BlochTensor2& b) {
    if (!is_finite(b.t1) || !is_finite(b.t2) || !is_finite(b.t12)) {
        throw std::invalid_argument("from_bloch2: non-finite tensor data");
    }
    const CMat2 id = CMat2::Identity();
    CMatX m = CMatX::Identity(4, 4);
    for (int i = 0; i < 3; ++i) {
        m += b.t1(i) * kron(pauli(i + 1), id);
        m += b.t2(i) * kron(id, pauli(i + 1));
        for (int j = 0; j < 3; ++j) {
            m += b.t12(i, j) * kron(pauli(i + 1), pauli(j + 1));
        }
    }
    return detail::flag_reconstruction(m / 4.0);
}

inline BlochTensor3 to_bloch3(const DensityMatrix& rho) {
    if (rho.dim() != 8) {
        throw std::invalid_argument("to_bloch3: expected a 3-qubit state");
    }
    const CMat2 id = CMat2::Identity();
    BlochTensor3 b;
    for (int i = 0; i < 3; ++i) {
        const CMat2& si = pauli(i + 1);
        b.t1(i) = detail::re_trace_product(rho.mat, kron(kron(si, id), id));
        b.t2(i) = detail::re_trace_product(rho.mat, kron(kron(id, si), id));
        b.t3(i) = detail::re_trace_product(rho.mat, kron(kron(id, id), si));
        for (int j = 0; j < 3; ++j) {
            const CMat2& sj = pauli(j + 1);
            b.t12(i, j) = detail::re_trace_product(rho.mat, kron(kron(si, sj), id));
            b.t13(i, j) = detail::re_trace_product(rho.mat, kron(kron(si, id), sj));
            b.t23(i, j) = detail::re_trace_product(rho.mat, kron(kron(id, si), sj));
            for (int k = 0; k < 3; ++k) {
                b.t(i, j, k) =
                    detail::re_trace_product(rho.mat, kron(kron(si, sj), pauli(k + 1)));
            }
        }
    }
    return b;
}

inline BlochReconstruction from_bloch3(const BlochTensor3& b) {
    const CMat2 id = CMat2::Identity();
    CMatX m = CMatX::Identity(8, 8);
    for (int i = 0; i < 3; ++i) {
        const CMat2& si = pauli(i + 1);
        m += b.t1(i) * kron(kron(si, id), id);
        m += b.t2(i) * kron(kron(id, si), id);
        m += b.t3(i) * kron(kron(id, id), si);
        for (int j = 0; j < 3; ++j) {
            const CMat2& sj = pauli(j + 1);
            m += b.t12(i, j) * kron(kron(si, sj), id);
            m += b.t13(i, j) * kron(kron(si, id), sj);
            m += b.t23(i, j) * kron(kron(id, si), sj);
            for (int k = 0; k < 3; ++k) {
                m += b.t(i, j, k) * kron(kron(si, sj), pauli(k + 1));
            }
        }
    }
    return detail::flag_reconstruction(m / 8.0);
}

inline Unfoldings3 unfold3(const BlochTensor3& b) {
    Unfoldings3 u;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                const double v = b.t(i, j, k);
                u.t1_23(i, 3 * j + k) = v;
                u.t2_13(j, 3 * i + k) = v;
                u.t3_12(k, 3 * i + j) = v;
            }
        }
    }
    u.cal_t1 = u.t1_23 * u.t1_23.transpose();
    u.cal_t2 = u.t2_13 * u.t2_13.transpose();
    u.cal_t3 = u.t3_12 * u.t3_12.transpose();
    u.cal_t23 = u.t1_23.transpose() * u.t1_23;
    u.cal_t13 = u.t2_13.transpose() * u.t2_13;
    u.cal_t12 = u.t3_12.transpose() * u.t3_12;
    return u;
}

}  // namespace luq
