#pragma once

// Optimization-based orbit-distance estimate, independent of the invariant
// machinery: minimize the Frobenius distance between sigma and conjugates of
// rho by products of per-qubit SU(2) factors. The result is an upper bound
// on the true orbit distance; a small value certifies closeness, a large
// value is only evidence of separation.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "luq/bloch.hpp"
#include "luq/pauli.hpp"
#include "luq/statekit.hpp"

namespace luq {

struct OracleResult {
    double min_distance = 0.0;
    std::vector<CMat2> best_unitaries;
    int restarts_used = 0;
};

/// SU(2) element exp(-i a s3/2) exp(-i b s2/2) exp(-i g s3/2).
inline CMat2 zyz_su2(double a, double b, double g) {
    const std::complex<double> im(0.0, 1.0);
    CMat2 rz1, ry, rz2;
    rz1 << std::exp(-im * (a / 2.0)), 0.0, 0.0, std::exp(im * (a / 2.0));
    ry << std::cos(b / 2.0), -std::sin(b / 2.0), std::sin(b / 2.0), std::cos(b / 2.0);
    rz2 << std::exp(-im * (g / 2.0)), 0.0, 0.0, std::exp(im * (g / 2.0));
    return rz1 * ry * rz2;
}

namespace detail {

struct SimplexResult {
    Eigen::VectorXd x;
    double f = 0.0;
};

template <typename F>
SimplexResult nelder_mead(F&& f, const Eigen::VectorXd& x0, double step, int max_evals,
                          double ftol_abs) {
    const auto n = static_cast<int>(x0.size());
    std::vector<Eigen::VectorXd> xs(static_cast<size_t>(n) + 1, x0);
    std::vector<double> fs(static_cast<size_t>(n) + 1);
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(x);
    };
    fs[0] = eval(xs[0]);
    for (int i = 1; i <= n; ++i) {
        xs[static_cast<size_t>(i)](i - 1) += step;
        fs[static_cast<size_t>(i)] = eval(xs[static_cast<size_t>(i)]);
    }

    std::vector<size_t> order(xs.size());
    while (evals < max_evals) {
        for (size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fs[a] < fs[b]; });
        const size_t best = order.front();
        const size_t worst = order.back();
        const size_t second = order[order.size() - 2];
        if (fs[worst] - fs[best] < ftol_abs) {
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (size_t i : order) {
            if (i != worst) {
                centroid += xs[i];
            }
        }
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
        const double fr = eval(xr);
        if (fr < fs[best]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                xs[worst] = xe;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
            continue;
        }
        if (fr < fs[second]) {
            xs[worst] = xr;
            fs[worst] = fr;
            continue;
        }
        const double side = fr < fs[worst] ? 0.5 : -0.5;
        const Eigen::VectorXd xc = centroid + side * (centroid - xs[worst]);
        const double fc = eval(xc);
        if (fc < std::min(fr, fs[worst])) {
            xs[worst] = xc;
            fs[worst] = fc;
            continue;
        }
        for (size_t i : order) {
            if (i != best) {
                xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
                fs[i] = eval(xs[i]);
            }
        }
    }

    size_t arg = 0;
    for (size_t i = 1; i < fs.size(); ++i) {
        if (fs[i] < fs[arg]) {
            arg = i;
        }
    }
    return SimplexResult{xs[arg], fs[arg]};
}

}  // namespace detail

inline OracleResult oracle_min_distance(const DensityMatrix& rho, const DensityMatrix& sigma,
                                        int restarts = 100, RngSeed seed = 0) {
    if (rho.dim() != sigma.dim()) {
        throw std::invalid_argument("oracle_min_distance: dimension mismatch");
    }
    if (restarts < 1) {
        throw std::invalid_argument("oracle_min_distance: restarts must be positive");
    }
    const int nq = rho.qubits();
    const int nparam = 3 * nq;
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);

    auto unitaries_at = [&](const Eigen::VectorXd& x) {
        std::vector<CMat2> us(static_cast<size_t>(nq));
        for (int q = 0; q < nq; ++q) {
            us[static_cast<size_t>(q)] = zyz_su2(x(3 * q), x(3 * q + 1), x(3 * q + 2));
        }
        return us;
    };
    auto objective = [&](const Eigen::VectorXd& x) {
        const CMatX u = tensor_chain(unitaries_at(x));
        return (sigma.mat - u * rho.mat * u.adjoint()).norm();
    };

    constexpr double kEarlyStop = 5e-7;
    OracleResult out;
    out.min_distance = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nparam);
        if (r > 0) {
            for (int k = 0; k < nparam; ++k) {
                x0(k) = angle(rng);
            }
        }
        auto res = detail::nelder_mead(objective, x0, 0.6, 200 * nparam, 1e-12);
        ++out.restarts_used;
        if (res.f < out.min_distance) {
            // fresh simplices from the incumbent crawl along nearly flat
            // valleys (near-degenerate spectra); a full step cycle without
            // improvement ends the loop
            constexpr std::array<double, 3> steps = {0.5, 0.15, 0.05};
            int stall = 0;
            for (int round = 0; round < 24 && stall < 3 && res.f > kEarlyStop; ++round) {
                const auto polished =
                    detail::nelder_mead(objective, res.x, steps[static_cast<size_t>(round % 3)],
                                        200 * nparam, 1e-14);
                if (polished.f < res.f) {
                    stall = polished.f < 0.999 * res.f ? 0 : stall + 1;
                    res = polished;
                } else {
                    ++stall;
                }
            }
            out.min_distance = res.f;
            out.best_unitaries = unitaries_at(res.x);
        }
        if (out.min_distance <= kEarlyStop) {
            break;
        }
    }
    return out;
}

}  // namespace luq
