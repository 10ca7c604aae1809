#pragma once

// Seeded generators for states and local unitaries, the SU(2) -> SO(3)
// projection, and a reproducible counterexample pair that degree-limited
// polynomial invariants cannot separate.
//
// Rotation convention, pinned here and used everywhere else: for U in SU(2),
// su2_to_so3(U) is the O with U sigma_l U^dag = sum_k O_{kl} sigma_k, so
// Bloch vectors transform as r -> O r and su2_to_so3(UV) =
// su2_to_so3(U) su2_to_so3(V).

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "luq/bloch.hpp"
#include "luq/linalg.hpp"
#include "luq/pauli.hpp"

namespace luq {

using RngSeed = std::uint64_t;

inline std::mt19937_64 make_rng(RngSeed seed) { return std::mt19937_64{seed}; }

inline DensityMatrix random_density(int dim, int rank, std::mt19937_64& rng) {
    if (dim != 4 && dim != 8) {
        throw std::invalid_argument("random_density: dimension must be 4 or 8");
    }
    if (rank < 1 || rank > dim) {
        throw std::invalid_argument("random_density: rank out of range");
    }
    std::normal_distribution<double> gauss;
    CMatX g(dim, rank);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < rank; ++j) {
            g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
        }
    }
    CMatX m = g * g.adjoint();
    m /= m.trace();
    return DensityMatrix::make(std::move(m));
}

inline DensityMatrix random_density(int dim, std::mt19937_64& rng) {
    return random_density(dim, dim, rng);
}

inline DensityMatrix random_density(int dim, int rank, RngSeed seed) {
    auto rng = make_rng(seed);
    return random_density(dim, rank, rng);
}

inline DensityMatrix random_density(int dim, RngSeed seed) {
    auto rng = make_rng(seed);
    return random_density(dim, dim, rng);
}

/// Haar-distributed SU(2) element via a normalized Gaussian quaternion
/// (w,x,y,z) -> wI - i(x sigma_1 + y sigma_2 + z sigma_3).
inline CMat2 haar_su2(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Eigen::Vector4d q;
    do {
        q << gauss(rng), gauss(rng), gauss(rng), gauss(rng);
    } while (q.norm() < 1e-8);
    q.normalize();
    const double w = q(0), x = q(1), y = q(2), z = q(3);
    CMat2 u;
    u << std::complex<double>(w, -z), std::complex<double>(-y, -x),
        std::complex<double>(y, -x), std::complex<double>(w, z);
    return u;
}

inline CMat2 haar_su2(RngSeed seed) {
    auto rng = make_rng(seed);
    return haar_su2(rng);
}

inline RMat3 su2_to_so3(const CMat2& u) {
    if (!u.allFinite()) {
        throw std::invalid_argument("su2_to_so3: non-finite input");
    }
    if ((u * u.adjoint() - CMat2::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("su2_to_so3: input is not unitary");
    }
    if (std::abs(u.determinant() - std::complex<double>(1.0, 0.0)) > 1e-10) {
        throw std::invalid_argument("su2_to_so3: determinant is not 1");
    }
    RMat3 o;
    for (int l = 0; l < 3; ++l) {
        const CMat2 c = u * pauli(l + 1) * u.adjoint();
        for (int k = 0; k < 3; ++k) {
            o(k, l) = 0.5 * (pauli(k + 1) * c).trace().real();
        }
    }
    return o;
}

/// Conjugates by a per-qubit product of the given 2x2 unitaries.
inline DensityMatrix apply_local(const DensityMatrix& rho, const std::vector<CMat2>& us) {
    if (static_cast<int>(us.size()) != rho.qubits()) {
        throw std::invalid_argument("apply_local: need one unitary per qubit");
    }
    const CMatX u = tensor_chain(us);
    CMatX m = u * rho.mat * u.adjoint();
    m = (m + m.adjoint()) / 2.0;
    return DensityMatrix::make(std::move(m));
}

struct OrbitPair {
    DensityMatrix state;
    std::vector<CMat2> unitaries;
};

/// Image of rho under independent Haar SU(2) factors, with the ground truth.
inline OrbitPair orbit_pair(const DensityMatrix& rho, RngSeed seed) {
    auto rng = make_rng(seed);
    std::vector<CMat2> us;
    us.reserve(static_cast<size_t>(rho.qubits()));
    for (int q = 0; q < rho.qubits(); ++q) {
        us.push_back(haar_su2(rng));
    }
    DensityMatrix rotated = apply_local(rho, us);
    return OrbitPair{std::move(rotated), std::move(us)};
}

/// Two 2-qubit states with t1 proportional to (1,1,1) and (1,1,-1), t2 = 0,
/// and a shared t12. The correlation matrix is drawn block diagonal with
/// respect to the 12|3 coordinate split, which makes every quadratic and
/// quartic vector invariant agree exactly between the two states while the
/// orientation (triple product) of the iterated-map family flips sign. The
/// draw is resampled until the singular values are distinct and nonzero, the
/// families span all of R^3 with a margin, and the positivity rescaling
/// leaves the triple products well clear of comparison tolerances.
inline std::pair<BlochTensor2, BlochTensor2> counterexample_pair(RngSeed seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss;
    const RVec3 t1(1.0, 1.0, 1.0);
    const RVec3 t1_hat(1.0, 1.0, -1.0);

    for (int attempt = 0; attempt < 1000; ++attempt) {
        RMat3 t12 = RMat3::Zero();
        t12(0, 0) = gauss(rng);
        t12(0, 1) = gauss(rng);
        t12(1, 0) = gauss(rng);
        t12(1, 1) = gauss(rng);
        t12(2, 2) = gauss(rng);
        const double norm = t12.norm();
        if (norm < 1e-8) continue;
        t12 *= std::sqrt(3.0) / norm;

        const RVec3 sv = svd3(t12).sigma;
        if (sv(2) < 0.15) continue;
        if (sv(0) - sv(1) < 0.1 || sv(1) - sv(2) < 0.1) continue;

        const RMat3 k = t12 * t12.transpose();
        RMat3 fam;
        fam.col(0) = t1;
        fam.col(1) = k * t1;
        fam.col(2) = k * (k * t1);
        if (std::abs(fam.determinant()) < 0.05) continue;
        if (rank_tol({fam.col(0), fam.col(1), fam.col(2)}) != 3) continue;

        BlochTensor2 a;
        a.t1 = t1;
        a.t12 = t12;
        BlochTensor2 b;
        b.t1 = t1_hat;
        b.t12 = t12;

        const double margin = 1e-3;
        const double worst = std::min(from_bloch2(a).min_eig, from_bloch2(b).min_eig);
        double scale = 1.0;
        if (worst < margin) {
            scale = (0.25 - margin) / (0.25 - worst);
        }
        a.t1 *= scale;
        a.t12 *= scale;
        b.t1 *= scale;
        b.t12 *= scale;

        // s appears once per family member and twice per map application, so
        // the triple ends up O(scale^9); keep it clear of 1e-9 comparisons.
        if (std::abs(fam.determinant()) * std::pow(scale, 9) < 1e-7) continue;

        return {a, b};
    }
    throw std::runtime_error("counterexample_pair: no acceptable draw in 1000 attempts");
}

}  // namespace luq
