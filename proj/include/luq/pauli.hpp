#pragma once

// Pauli matrices, Kronecker products, and local-unitary conjugation helpers.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace luq {

using CMat2 = Eigen::Matrix2cd;
using CMatX = Eigen::MatrixXcd;

/// Pauli matrix sigma_k for k in {1,2,3} = x, y, z.
inline const CMat2& pauli(int k) {
    static const CMat2 sx = (CMat2() << 0.0, 1.0, 1.0, 0.0).finished();
    static const CMat2 sy =
        (CMat2() << 0.0, std::complex<double>(0.0, -1.0), std::complex<double>(0.0, 1.0), 0.0)
            .finished();
    static const CMat2 sz = (CMat2() << 1.0, 0.0, 0.0, -1.0).finished();
    switch (k) {
        case 1:
            return sx;
        case 2:
            return sy;
        case 3:
            return sz;
        default:
            throw std::invalid_argument("pauli: index must be 1, 2, or 3");
    }
}

template <typename A, typename B>
auto kron(const A& a, const B& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

/// Tensor product of the given single-qubit factors, in qubit order.
inline CMatX tensor_chain(const std::vector<CMat2>& factors) {
    if (factors.empty()) {
        throw std::invalid_argument("tensor_chain: no factors");
    }
    CMatX out = factors[0];
    for (size_t i = 1; i < factors.size(); ++i) {
        out = kron(out, factors[i]);
    }
    return out;
}

/// (U_1 x ... x U_n) m (U_1 x ... x U_n)^dag.
inline CMatX conjugate_local(const CMatX& m, const std::vector<CMat2>& factors) {
    CMatX u = tensor_chain(factors);
    if (u.rows() != m.rows()) {
        throw std::invalid_argument("conjugate_local: dimension mismatch");
    }
    return u * m * u.adjoint();
}

}  // namespace luq
