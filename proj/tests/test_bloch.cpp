#include "luq/bloch.hpp"

#include <complex>
#include <random>

#include <gtest/gtest.h>

namespace {

using namespace luq;
using cd = std::complex<double>;

// Test-local Kronecker product so layout checks do not reuse the library's.
Eigen::MatrixXcd kron_ref(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Eigen::MatrixXcd pauli_ref(int k) {
    Eigen::MatrixXcd s(2, 2);
    switch (k) {
        case 0: s << 1, 0, 0, 1; break;
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, cd(0, -1), cd(0, 1), 0; break;
        default: s << 1, 0, 0, -1; break;
    }
    return s;
}

DensityMatrix random_density(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            g(i, j) = cd(gauss(rng), gauss(rng));
        }
    }
    Eigen::MatrixXcd m = g * g.adjoint();
    m /= m.trace();
    return DensityMatrix::make(m);
}

struct LocalRotation {
    Eigen::Matrix2cd u;
    RMat3 o;
};

// Unit quaternion (w,x,y,z) -> U = wI - i(x sx + y sy + z sz) together with
// the matching rotation, written out directly as an independent reference.
LocalRotation random_local_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Eigen::Vector4d q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    const double w = q(0), x = q(1), y = q(2), z = q(3);

    LocalRotation r;
    r.u << cd(w, -z), cd(-y, -x), cd(y, -x), cd(w, z);
    r.o << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

DensityMatrix pure_state(const Eigen::VectorXcd& psi) {
    Eigen::MatrixXcd m = psi * psi.adjoint();
    return DensityMatrix::make(m);
}

TEST(DensityMatrix, AcceptsMaximallyMixed) {
    auto rho = DensityMatrix::make(Eigen::MatrixXcd::Identity(4, 4) / 4.0);
    EXPECT_EQ(rho.dim(), 4);
    EXPECT_EQ(rho.qubits(), 2);
    auto rho3 = DensityMatrix::make(Eigen::MatrixXcd::Identity(8, 8) / 8.0);
    EXPECT_EQ(rho3.qubits(), 3);
}

TEST(DensityMatrix, RejectsBadInput) {
    EXPECT_THROW(DensityMatrix::make(Eigen::MatrixXcd::Identity(3, 3) / 3.0),
                 std::invalid_argument);

    Eigen::MatrixXcd nonherm = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
    nonherm(0, 1) = cd(0.1, 0.0);
    EXPECT_THROW(DensityMatrix::make(nonherm), std::invalid_argument);

    EXPECT_THROW(DensityMatrix::make(Eigen::MatrixXcd::Identity(4, 4)),
                 std::invalid_argument);

    Eigen::MatrixXcd indefinite = Eigen::MatrixXcd::Zero(4, 4);
    indefinite.diagonal() << 0.6, 0.5, -0.1, 0.0;
    EXPECT_THROW(DensityMatrix::make(indefinite), std::invalid_argument);
}

TEST(Bloch2, BellState) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
    psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
    BlochTensor2 b = to_bloch2(pure_state(psi));

    EXPECT_LT(b.t1.norm(), 1e-12);
    EXPECT_LT(b.t2.norm(), 1e-12);
    RMat3 expected = RMat3::Zero();
    expected.diagonal() << 1, -1, 1;
    EXPECT_LT((b.t12 - expected).norm(), 1e-12);
}

TEST(Bloch2, ProductStateZeroZero) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
    psi(0) = 1.0;
    BlochTensor2 b = to_bloch2(pure_state(psi));

    EXPECT_LT((b.t1 - RVec3(0, 0, 1)).norm(), 1e-12);
    EXPECT_LT((b.t2 - RVec3(0, 0, 1)).norm(), 1e-12);
    RMat3 expected = RMat3::Zero();
    expected(2, 2) = 1.0;
    EXPECT_LT((b.t12 - expected).norm(), 1e-12);
}

TEST(Bloch2, MaximallyMixedVanishes) {
    BlochTensor2 b = to_bloch2(DensityMatrix::make(Eigen::MatrixXcd::Identity(4, 4) / 4.0));
    EXPECT_LT(b.t1.norm(), 1e-14);
    EXPECT_LT(b.t2.norm(), 1e-14);
    EXPECT_LT(b.t12.norm(), 1e-14);
}

TEST(Bloch2, MatchesDirectTraces) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        DensityMatrix rho = random_density(4, rng);
        BlochTensor2 b = to_bloch2(rho);
        for (int i = 0; i < 3; ++i) {
            const double r1 =
                (rho.mat * kron_ref(pauli_ref(i + 1), pauli_ref(0))).trace().real();
            const double r2 =
                (rho.mat * kron_ref(pauli_ref(0), pauli_ref(i + 1))).trace().real();
            EXPECT_NEAR(b.t1(i), r1, 1e-12);
            EXPECT_NEAR(b.t2(i), r2, 1e-12);
            for (int j = 0; j < 3; ++j) {
                const double r12 =
                    (rho.mat * kron_ref(pauli_ref(i + 1), pauli_ref(j + 1))).trace().real();
                EXPECT_NEAR(b.t12(i, j), r12, 1e-12);
            }
        }
    }
}

TEST(Bloch2, RoundTrip) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        DensityMatrix rho = random_density(4, rng);
        BlochReconstruction back = from_bloch2(to_bloch2(rho));
        ASSERT_TRUE(back.physical);
        EXPECT_LT((back.mat - rho.mat).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((back.to_density().mat - rho.mat).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Bloch2, FlagsNonPhysicalData) {
    BlochTensor2 b;
    b.t1 = RVec3(2, 0, 0);
    BlochReconstruction r = from_bloch2(b);
    EXPECT_FALSE(r.physical);
    EXPECT_NEAR(r.min_eig, -0.25, 1e-12);
    EXPECT_THROW(r.to_density(), std::invalid_argument);

    b.t1(0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(from_bloch2(b), std::invalid_argument);
}

TEST(Bloch2, LocalRotationCovariance) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        DensityMatrix rho = random_density(4, rng);
        LocalRotation a = random_local_rotation(rng);
        LocalRotation c = random_local_rotation(rng);

        Eigen::MatrixXcd u = kron_ref(a.u, c.u);
        DensityMatrix rotated = DensityMatrix::make(u * rho.mat * u.adjoint());

        BlochTensor2 b = to_bloch2(rho);
        BlochTensor2 bh = to_bloch2(rotated);
        EXPECT_LT((bh.t1 - a.o * b.t1).norm(), 1e-10);
        EXPECT_LT((bh.t2 - c.o * b.t2).norm(), 1e-10);
        EXPECT_LT((bh.t12 - a.o * b.t12 * c.o.transpose()).norm(), 1e-10);
    }
}

TEST(Bloch3, GhzState) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
    psi(0) = psi(7) = 1.0 / std::sqrt(2.0);
    BlochTensor3 b = to_bloch3(pure_state(psi));

    EXPECT_LT(b.t1.norm(), 1e-12);
    EXPECT_LT(b.t2.norm(), 1e-12);
    EXPECT_LT(b.t3.norm(), 1e-12);
    RMat3 zz = RMat3::Zero();
    zz(2, 2) = 1.0;
    EXPECT_LT((b.t12 - zz).norm(), 1e-12);
    EXPECT_LT((b.t13 - zz).norm(), 1e-12);
    EXPECT_LT((b.t23 - zz).norm(), 1e-12);

    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                double expected = 0.0;
                if (i == 0 && j == 0 && k == 0) expected = 1.0;
                if (i == 0 && j == 1 && k == 1) expected = -1.0;
                if (i == 1 && j == 0 && k == 1) expected = -1.0;
                if (i == 1 && j == 1 && k == 0) expected = -1.0;
                EXPECT_NEAR(b.t(i, j, k), expected, 1e-12);
            }
        }
    }
}

TEST(Bloch3, ProductStateZeroZeroZero) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
    psi(0) = 1.0;
    BlochTensor3 b = to_bloch3(pure_state(psi));

    EXPECT_LT((b.t1 - RVec3(0, 0, 1)).norm(), 1e-12);
    EXPECT_LT((b.t2 - RVec3(0, 0, 1)).norm(), 1e-12);
    EXPECT_LT((b.t3 - RVec3(0, 0, 1)).norm(), 1e-12);
    RMat3 zz = RMat3::Zero();
    zz(2, 2) = 1.0;
    EXPECT_LT((b.t12 - zz).norm(), 1e-12);
    EXPECT_LT((b.t13 - zz).norm(), 1e-12);
    EXPECT_LT((b.t23 - zz).norm(), 1e-12);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                EXPECT_NEAR(b.t(i, j, k), (i == 2 && j == 2 && k == 2) ? 1.0 : 0.0, 1e-12);
            }
        }
    }
}

TEST(Bloch3, MatchesDirectTraces) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        DensityMatrix rho = random_density(8, rng);
        BlochTensor3 b = to_bloch3(rho);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                for (int k = 0; k < 3; ++k) {
                    const auto word =
                        kron_ref(kron_ref(pauli_ref(i), pauli_ref(j)), pauli_ref(k));
                    const double expected = (rho.mat * word).trace().real();
                    double got = 0.0;
                    if (i == 0 && j == 0 && k == 0) {
                        got = 1.0;
                    } else if (i > 0 && j == 0 && k == 0) {
                        got = b.t1(i - 1);
                    } else if (i == 0 && j > 0 && k == 0) {
                        got = b.t2(j - 1);
                    } else if (i == 0 && j == 0) {
                        got = b.t3(k - 1);
                    } else if (i > 0 && j > 0 && k == 0) {
                        got = b.t12(i - 1, j - 1);
                    } else if (i > 0 && j == 0) {
                        got = b.t13(i - 1, k - 1);
                    } else if (i == 0) {
                        got = b.t23(j - 1, k - 1);
                    } else {
                        got = b.t(i - 1, j - 1, k - 1);
                    }
                    EXPECT_NEAR(got, expected, 1e-12);
                }
            }
        }
    }
}

TEST(Bloch3, RoundTrip) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 200; ++trial) {
        DensityMatrix rho = random_density(8, rng);
        BlochReconstruction back = from_bloch3(to_bloch3(rho));
        ASSERT_TRUE(back.physical);
        EXPECT_LT((back.mat - rho.mat).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Unfold3, Layout) {
    BlochTensor3 b;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                b.t(i, j, k) = 100.0 * i + 10.0 * j + k;
            }
        }
    }
    Unfoldings3 u = unfold3(b);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                const double v = 100.0 * i + 10.0 * j + k;
                EXPECT_EQ(u.t1_23(i, 3 * j + k), v);
                EXPECT_EQ(u.t2_13(j, 3 * i + k), v);
                EXPECT_EQ(u.t3_12(k, 3 * i + j), v);
            }
        }
    }
}

TEST(Unfold3, GramTracesAgree) {
    std::mt19937_64 rng(16);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 50; ++trial) {
        BlochTensor3 b;
        double sumsq = 0.0;
        for (double& v : b.t123) {
            v = gauss(rng);
            sumsq += v * v;
        }
        Unfoldings3 u = unfold3(b);
        EXPECT_NEAR(u.cal_t1.trace(), sumsq, 1e-10);
        EXPECT_NEAR(u.cal_t2.trace(), sumsq, 1e-10);
        EXPECT_NEAR(u.cal_t3.trace(), sumsq, 1e-10);
        EXPECT_NEAR(u.cal_t23.trace(), sumsq, 1e-10);
        EXPECT_NEAR(u.cal_t13.trace(), sumsq, 1e-10);
        EXPECT_NEAR(u.cal_t12.trace(), sumsq, 1e-10);
    }
}

TEST(Unfold3, LocalRotationCovariance) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        DensityMatrix rho = random_density(8, rng);
        LocalRotation a = random_local_rotation(rng);
        LocalRotation c = random_local_rotation(rng);
        LocalRotation d = random_local_rotation(rng);

        Eigen::MatrixXcd u = kron_ref(kron_ref(a.u, c.u), d.u);
        DensityMatrix rotated = DensityMatrix::make(u * rho.mat * u.adjoint());

        Unfoldings3 before = unfold3(to_bloch3(rho));
        Unfoldings3 after = unfold3(to_bloch3(rotated));

        Eigen::MatrixXcd kron23 = kron_ref(c.o.cast<cd>(), d.o.cast<cd>());
        Mat99 o23 = kron23.real();
        EXPECT_LT((after.t1_23 - a.o * before.t1_23 * o23.transpose()).norm(), 1e-10);

        Eigen::MatrixXcd kron13 = kron_ref(a.o.cast<cd>(), d.o.cast<cd>());
        Mat99 o13 = kron13.real();
        EXPECT_LT((after.t2_13 - c.o * before.t2_13 * o13.transpose()).norm(), 1e-10);

        Eigen::MatrixXcd kron12 = kron_ref(a.o.cast<cd>(), c.o.cast<cd>());
        Mat99 o12 = kron12.real();
        EXPECT_LT((after.t3_12 - d.o * before.t3_12 * o12.transpose()).norm(), 1e-10);

        EXPECT_LT((after.cal_t1 - a.o * before.cal_t1 * a.o.transpose()).norm(), 1e-10);
        EXPECT_LT((after.cal_t2 - c.o * before.cal_t2 * c.o.transpose()).norm(), 1e-10);
        EXPECT_LT((after.cal_t3 - d.o * before.cal_t3 * d.o.transpose()).norm(), 1e-10);
    }
}

}  // namespace
