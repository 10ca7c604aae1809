#pragma once

// Rotation-invariant fingerprints of 2- and 3-qubit Bloch data. Two states
// related by per-qubit unitaries produce identical fingerprints; the
// equivalence decisions compare these first and only then attempt to build
// an explicit witness.

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "luq/bloch.hpp"
#include "luq/families.hpp"
#include "luq/linalg.hpp"

namespace luq {

inline constexpr double kFingerprintTol = 1e-9;

struct Fingerprint2 {
    std::array<int, 2> dims{};
    // scalar products in fixed order: <mu_i,mu_i> and <nu_i,nu_i> for
    // i = 1..3, then <mu_1,mu_j> for j = 2, 4, 6
    std::array<double, 9> L{};
    std::optional<double> triple_mu;
    std::optional<double> triple_nu;
    std::array<double, 2> tr_alpha{};  // tr(t12 t12^t)^alpha, alpha = 1, 2
    double det_t12 = 0.0;
    double inv_I = 0.0;
};

struct Fingerprint3 {
    std::array<int, 3> dims{};
    Eigen::MatrixXd gram_mu, gram_nu, gram_omega;
    std::optional<double> triple_mu;
    std::optional<double> triple_nu;
    std::optional<double> triple_omega;
    std::array<std::array<double, 3>, 3> aux_traces{};  // [subsystem][r-1] = tr(cal_t^r)
    std::array<std::array<double, 3>, 3> aux_quad{};    // [subsystem][r-1] = t^t cal_t^(r-1) t
    int depth = 2;
    bool truncated = false;
};

/// Outcome of a componentwise fingerprint comparison; `field` names the
/// first mismatch in the fixed field order.
struct CompareResult {
    bool equal = true;
    std::string field;
    double lhs = 0.0;
    double rhs = 0.0;

    std::string text() const {
        if (equal) {
            return "equal";
        }
        std::ostringstream os;
        os << field << ": " << lhs << " vs " << rhs;
        return os.str();
    }
};

inline constexpr std::array<const char*, 9> kL2Names = {
    "mu1.mu1", "mu2.mu2", "mu3.mu3", "nu1.nu1", "nu2.nu2",
    "nu3.nu3", "mu1.mu2", "mu1.mu4", "mu1.mu6",
};

/// Full Levi-Civita contraction e_{ijk} e_{lmn} t1_i t2_l t12_{jm} t12_{kn}.
inline double invariant_I(const BlochTensor2& b) {
    struct Perm {
        int p0, p1, p2;
        double sign;
    };
    static constexpr std::array<Perm, 6> perms = {{
        {0, 1, 2, 1.0},
        {1, 2, 0, 1.0},
        {2, 0, 1, 1.0},
        {0, 2, 1, -1.0},
        {2, 1, 0, -1.0},
        {1, 0, 2, -1.0},
    }};
    double acc = 0.0;
    for (const auto& a : perms) {
        for (const auto& c : perms) {
            acc += a.sign * c.sign * b.t1(a.p0) * b.t2(c.p0) * b.t12(a.p1, c.p1) *
                   b.t12(a.p2, c.p2);
        }
    }
    return acc;
}

namespace detail {

inline std::optional<double> family_triple(const VectorFamily& f) {
    auto basis = pick_basis(f);
    if (!basis) {
        return std::nullopt;
    }
    return triple(f.members[static_cast<size_t>((*basis)[0] - 1)].v,
                  f.members[static_cast<size_t>((*basis)[1] - 1)].v,
                  f.members[static_cast<size_t>((*basis)[2] - 1)].v);
}

inline Eigen::MatrixXd family_gram(const VectorFamily& f) {
    const auto n = static_cast<Eigen::Index>(f.members.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            g(i, j) = g(j, i) =
                f.members[static_cast<size_t>(i)].v.dot(f.members[static_cast<size_t>(j)].v);
        }
    }
    return g;
}

}  // namespace detail

inline Fingerprint2 fingerprint2(const BlochTensor2& b) {
    if (!is_finite(b.t1) || !is_finite(b.t2) || !is_finite(b.t12)) {
        throw std::invalid_argument("fingerprint2: non-finite tensor data");
    }
    auto [s1, s2] = build_families2(b);
    const auto& mu = s1.members;
    const auto& nu = s2.members;

    Fingerprint2 f;
    f.dims = {s1.dim, s2.dim};
    f.L = {
        mu[0].v.dot(mu[0].v), mu[1].v.dot(mu[1].v), mu[2].v.dot(mu[2].v),
        nu[0].v.dot(nu[0].v), nu[1].v.dot(nu[1].v), nu[2].v.dot(nu[2].v),
        mu[0].v.dot(mu[1].v), mu[0].v.dot(mu[3].v), mu[0].v.dot(mu[5].v),
    };
    f.triple_mu = detail::family_triple(s1);
    f.triple_nu = detail::family_triple(s2);
    const RMat3 k = b.t12 * b.t12.transpose();
    f.tr_alpha = {k.trace(), (k * k).trace()};
    f.det_t12 = b.t12.determinant();
    f.inv_I = invariant_I(b);
    return f;
}

inline Fingerprint3 fingerprint3(const BlochTensor3& b, int depth = 2) {
    auto fams = build_families3(b, depth);
    const Unfoldings3 u = unfold3(b);
    const std::array<RMat3, 3> gram = {u.cal_t1, u.cal_t2, u.cal_t3};
    const std::array<RVec3, 3> t = {b.t1, b.t2, b.t3};

    Fingerprint3 f;
    f.depth = depth;
    f.dims = {fams[0].dim, fams[1].dim, fams[2].dim};
    f.gram_mu = detail::family_gram(fams[0]);
    f.gram_nu = detail::family_gram(fams[1]);
    f.gram_omega = detail::family_gram(fams[2]);
    f.triple_mu = detail::family_triple(fams[0]);
    f.triple_nu = detail::family_triple(fams[1]);
    f.triple_omega = detail::family_triple(fams[2]);
    for (int i = 0; i < 3; ++i) {
        RMat3 power = RMat3::Identity();
        for (int r = 1; r <= 3; ++r) {
            power = power * gram[static_cast<size_t>(i)];
            f.aux_traces[static_cast<size_t>(i)][static_cast<size_t>(r - 1)] = power.trace();
        }
        power = RMat3::Identity();
        for (int r = 1; r <= 3; ++r) {
            f.aux_quad[static_cast<size_t>(i)][static_cast<size_t>(r - 1)] =
                t[static_cast<size_t>(i)].dot(power * t[static_cast<size_t>(i)]);
            power = power * gram[static_cast<size_t>(i)];
        }
    }
    f.truncated = fams[0].truncated || fams[1].truncated || fams[2].truncated;
    return f;
}

namespace detail {

class FieldComparer {
  public:
    explicit FieldComparer(double tol) : tol_(tol) {}

    bool mismatched() const { return !result_.equal; }
    const CompareResult& result() const { return result_; }

    void exact(const std::string& name, double a, double b) {
        if (!result_.equal) {
            return;
        }
        if (a != b) {
            result_ = CompareResult{false, name, a, b};
        }
    }

    void real(const std::string& name, double a, double b) {
        if (!result_.equal) {
            return;
        }
        if (!(std::abs(a - b) <= tol_)) {
            result_ = CompareResult{false, name, a, b};
        }
    }

    void optional_real(const std::string& name, const std::optional<double>& a,
                       const std::optional<double>& b) {
        if (!result_.equal) {
            return;
        }
        if (a.has_value() != b.has_value()) {
            result_ = CompareResult{false, name, a.value_or(std::nan("")),
                                    b.value_or(std::nan(""))};
            return;
        }
        if (a && b) {
            real(name, *a, *b);
        }
    }

  private:
    double tol_;
    CompareResult result_;
};

}  // namespace detail

inline CompareResult fingerprints_equal(const Fingerprint2& a, const Fingerprint2& b,
                                        double tol = kFingerprintTol) {
    detail::FieldComparer cmp(tol);
    cmp.exact("dims[1]", a.dims[0], b.dims[0]);
    cmp.exact("dims[2]", a.dims[1], b.dims[1]);
    for (size_t i = 0; i < 9; ++i) {
        cmp.real(kL2Names[i], a.L[i], b.L[i]);
    }
    cmp.optional_real("triple_mu", a.triple_mu, b.triple_mu);
    cmp.optional_real("triple_nu", a.triple_nu, b.triple_nu);
    cmp.real("tr_alpha[1]", a.tr_alpha[0], b.tr_alpha[0]);
    cmp.real("tr_alpha[2]", a.tr_alpha[1], b.tr_alpha[1]);
    cmp.real("det_t12", a.det_t12, b.det_t12);
    cmp.real("inv_I", a.inv_I, b.inv_I);
    return cmp.result();
}

inline CompareResult fingerprints_equal(const Fingerprint3& a, const Fingerprint3& b,
                                        double tol = kFingerprintTol) {
    if (a.depth != b.depth) {
        throw std::invalid_argument("fingerprints_equal: depth mismatch");
    }
    detail::FieldComparer cmp(tol);
    for (int i = 0; i < 3; ++i) {
        cmp.exact("dims[" + std::to_string(i + 1) + "]", a.dims[static_cast<size_t>(i)],
                  b.dims[static_cast<size_t>(i)]);
    }
    const std::array<const char*, 3> names = {"gram_mu", "gram_nu", "gram_omega"};
    const std::array<const Eigen::MatrixXd*, 3> ga = {&a.gram_mu, &a.gram_nu, &a.gram_omega};
    const std::array<const Eigen::MatrixXd*, 3> gb = {&b.gram_mu, &b.gram_nu, &b.gram_omega};
    for (int g = 0; g < 3 && !cmp.mismatched(); ++g) {
        const auto& ma = *ga[static_cast<size_t>(g)];
        const auto& mb = *gb[static_cast<size_t>(g)];
        cmp.exact(std::string(names[static_cast<size_t>(g)]) + ".size",
                  static_cast<double>(ma.rows()), static_cast<double>(mb.rows()));
        if (cmp.mismatched()) {
            break;
        }
        for (Eigen::Index i = 0; i < ma.rows() && !cmp.mismatched(); ++i) {
            for (Eigen::Index j = 0; j <= i && !cmp.mismatched(); ++j) {
                std::ostringstream name;
                name << names[static_cast<size_t>(g)] << "[" << i + 1 << "," << j + 1 << "]";
                cmp.real(name.str(), ma(i, j), mb(i, j));
            }
        }
    }
    cmp.optional_real("triple_mu", a.triple_mu, b.triple_mu);
    cmp.optional_real("triple_nu", a.triple_nu, b.triple_nu);
    cmp.optional_real("triple_omega", a.triple_omega, b.triple_omega);
    for (int i = 0; i < 3; ++i) {
        for (int r = 1; r <= 3; ++r) {
            std::ostringstream name;
            name << "tr_cal" << i + 1 << "_r" << r;
            cmp.real(name.str(), a.aux_traces[static_cast<size_t>(i)][static_cast<size_t>(r - 1)],
                     b.aux_traces[static_cast<size_t>(i)][static_cast<size_t>(r - 1)]);
        }
    }
    for (int i = 0; i < 3; ++i) {
        for (int r = 1; r <= 3; ++r) {
            std::ostringstream name;
            name << "quad_t" << i + 1 << "_r" << r;
            cmp.real(name.str(), a.aux_quad[static_cast<size_t>(i)][static_cast<size_t>(r - 1)],
                     b.aux_quad[static_cast<size_t>(i)][static_cast<size_t>(r - 1)]);
        }
    }
    return cmp.result();
}

namespace detail {

inline std::string canonical_real(double v, double tol) {
    double snapped = std::round(v / tol) * tol;
    if (snapped == 0.0) {
        snapped = 0.0;  // normalizes -0
    }
    std::ostringstream os;
    os.precision(12);
    os << snapped;
    return os.str();
}

inline std::string canonical_optional(const std::optional<double>& v, double tol) {
    return v ? canonical_real(*v, tol) : std::string("none");
}

}  // namespace detail

/// Canonical key-value rendering with reals snapped to the tolerance grid;
/// equal-at-tolerance fingerprints of the same shape render identically.
inline std::string canonical_text(const Fingerprint2& f, double tol = kFingerprintTol) {
    std::ostringstream os;
    os << "fingerprint2\n";
    os << "dims " << f.dims[0] << " " << f.dims[1] << "\n";
    for (size_t i = 0; i < 9; ++i) {
        os << kL2Names[i] << " " << detail::canonical_real(f.L[i], tol) << "\n";
    }
    os << "triple_mu " << detail::canonical_optional(f.triple_mu, tol) << "\n";
    os << "triple_nu " << detail::canonical_optional(f.triple_nu, tol) << "\n";
    os << "tr_alpha " << detail::canonical_real(f.tr_alpha[0], tol) << " "
       << detail::canonical_real(f.tr_alpha[1], tol) << "\n";
    os << "det_t12 " << detail::canonical_real(f.det_t12, tol) << "\n";
    os << "inv_I " << detail::canonical_real(f.inv_I, tol) << "\n";
    return os.str();
}

inline std::string canonical_text(const Fingerprint3& f, double tol = kFingerprintTol) {
    std::ostringstream os;
    os << "fingerprint3\n";
    os << "depth " << f.depth << "\n";
    os << "truncated " << (f.truncated ? 1 : 0) << "\n";
    os << "dims " << f.dims[0] << " " << f.dims[1] << " " << f.dims[2] << "\n";
    const std::array<const char*, 3> names = {"gram_mu", "gram_nu", "gram_omega"};
    const std::array<const Eigen::MatrixXd*, 3> gs = {&f.gram_mu, &f.gram_nu, &f.gram_omega};
    for (int g = 0; g < 3; ++g) {
        const auto& m = *gs[static_cast<size_t>(g)];
        os << names[static_cast<size_t>(g)] << " " << m.rows() << "\n";
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                os << detail::canonical_real(m(i, j), tol) << (j == i ? "\n" : " ");
            }
        }
    }
    os << "triple_mu " << detail::canonical_optional(f.triple_mu, tol) << "\n";
    os << "triple_nu " << detail::canonical_optional(f.triple_nu, tol) << "\n";
    os << "triple_omega " << detail::canonical_optional(f.triple_omega, tol) << "\n";
    for (int i = 0; i < 3; ++i) {
        os << "tr_cal" << i + 1;
        for (int r = 0; r < 3; ++r) {
            os << " " << detail::canonical_real(
                f.aux_traces[static_cast<size_t>(i)][static_cast<size_t>(r)], tol);
        }
        os << "\n";
    }
    for (int i = 0; i < 3; ++i) {
        os << "quad_t" << i + 1;
        for (int r = 0; r < 3; ++r) {
            os << " " << detail::canonical_real(
                f.aux_quad[static_cast<size_t>(i)][static_cast<size_t>(r)], tol);
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace luq
