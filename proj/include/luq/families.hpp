#pragma once

// Iterated vector families attached to Bloch tensors. Each family collects
// the subsystem vectors reachable from the marginal vectors through the
// correlation maps; rotating the state rotates every member by the same
// per-subsystem rotation, so spans, Gram matrices, and triple products built
// from them are the raw material for the equivalence decisions.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "luq/bloch.hpp"
#include "luq/linalg.hpp"

namespace luq {

inline constexpr int kFamilyCap = 200;
inline constexpr double kParallelCosTol = 1e-10;
inline constexpr double kNegligibleNorm = 1e-12;

struct FamilyMember {
    RVec3 v;
    std::string tag;  // symbolic construction record, e.g. "k*t1" or "unf1*(n2,w3)"
};

struct VectorFamily {
    int label = 0;  // subsystem 1, 2, or 3
    std::vector<FamilyMember> members;
    int dim = 0;
    bool truncated = false;

    std::vector<RVec3> vectors() const {
        std::vector<RVec3> vs;
        vs.reserve(members.size());
        for (const auto& m : members) {
            vs.push_back(m.v);
        }
        return vs;
    }
};

namespace detail {

inline int family_rank(const std::vector<FamilyMember>& members) {
    std::vector<RVec3> vs;
    vs.reserve(members.size());
    for (const auto& m : members) {
        vs.push_back(m.v);
    }
    return vs.empty() ? 0 : rank_tol(vs);
}

// True when the candidate is numerically parallel to an existing member.
inline bool is_parallel(const RVec3& a, const RVec3& b) {
    const double na = a.norm(), nb = b.norm();
    if (na < kNegligibleNorm || nb < kNegligibleNorm) {
        return false;
    }
    return std::abs(a.dot(b)) / (na * nb) >= 1.0 - kParallelCosTol;
}

inline void try_add(VectorFamily& f, const RVec3& v, std::string tag) {
    if (v.norm() <= kNegligibleNorm) {
        return;
    }
    for (const auto& m : f.members) {
        if (is_parallel(v, m.v)) {
            return;
        }
    }
    if (static_cast<int>(f.members.size()) >= kFamilyCap) {
        f.truncated = true;
        return;
    }
    f.members.push_back(FamilyMember{v, std::move(tag)});
}

}  // namespace detail

/// The two 6-member families (mu_1..mu_6) and (nu_1..nu_6). Members repeat
/// the closed pattern seed, map(seed), and the first two powers of the
/// squared correlation map; later powers are linear combinations of these by
/// the degree-3 characteristic identity, so six members span everything.
inline std::pair<VectorFamily, VectorFamily> build_families2(const BlochTensor2& b) {
    const RMat3 k = b.t12 * b.t12.transpose();
    const RMat3 kp = b.t12.transpose() * b.t12;
    const RVec3 mu2 = b.t12 * b.t2;
    const RVec3 nu2 = b.t12.transpose() * b.t1;

    VectorFamily s1;
    s1.label = 1;
    s1.members = {
        {b.t1, "t1"},
        {mu2, "t12*t2"},
        {k * b.t1, "k*t1"},
        {k * mu2, "k*t12*t2"},
        {k * (k * b.t1), "k^2*t1"},
        {k * (k * mu2), "k^2*t12*t2"},
    };
    s1.dim = detail::family_rank(s1.members);

    VectorFamily s2;
    s2.label = 2;
    s2.members = {
        {b.t2, "t2"},
        {nu2, "t12^t*t1"},
        {kp * b.t2, "k'*t2"},
        {kp * nu2, "k'*t12^t*t1"},
        {kp * (kp * b.t2), "k'^2*t2"},
        {kp * (kp * nu2), "k'^2*t12^t*t1"},
    };
    s2.dim = detail::family_rank(s2.members);

    return {std::move(s1), std::move(s2)};
}

/// Fixpoint generation for the three 3-qubit families. Each round reads a
/// snapshot of all three families and appends, in a fixed generator order:
/// the first two powers of the own-subsystem Gram map, images across the
/// pair correlation matrices, and unfolding contractions against pairs from
/// the other two families. New members only feed generators in the next
/// round, so results at smaller depth are a prefix of results at larger
/// depth.
inline std::array<VectorFamily, 3> build_families3(const BlochTensor3& b, int depth = 2) {
    if (depth < 1 || depth > 3) {
        throw std::invalid_argument("build_families3: depth must be 1, 2, or 3");
    }
    const Unfoldings3 u = unfold3(b);

    std::array<VectorFamily, 3> fams;
    fams[0].label = 1;
    fams[0].members = {{b.t1, "t1"}};
    fams[1].label = 2;
    fams[1].members = {{b.t2, "t2"}};
    fams[2].label = 3;
    fams[2].members = {{b.t3, "t3"}};

    const std::array<RMat3, 3> gram = {u.cal_t1, u.cal_t2, u.cal_t3};
    const std::array<const char*, 3> short_name = {"m", "n", "w"};

    auto kron9 = [](const RVec3& v, const RVec3& w) {
        Eigen::Matrix<double, 9, 1> out;
        for (int a = 0; a < 3; ++a) {
            for (int c = 0; c < 3; ++c) {
                out(3 * a + c) = v(a) * w(c);
            }
        }
        return out;
    };

    for (int round = 0; round < depth; ++round) {
        const std::array<std::vector<FamilyMember>, 3> snap = {
            fams[0].members, fams[1].members, fams[2].members};

        for (int fi = 0; fi < 3; ++fi) {
            VectorFamily& f = fams[fi];
            const auto& own = snap[static_cast<size_t>(fi)];

            for (int power = 1; power <= 2; ++power) {
                for (size_t mi = 0; mi < own.size(); ++mi) {
                    RVec3 v = own[mi].v;
                    for (int p = 0; p < power; ++p) {
                        v = gram[static_cast<size_t>(fi)] * v;
                    }
                    std::string tag = "cal" + std::to_string(fi + 1) +
                                      (power == 2 ? "^2" : "") + "*" + short_name[static_cast<size_t>(fi)] +
                                      std::to_string(mi + 1);
                    detail::try_add(f, v, std::move(tag));
                }
            }

            struct CrossMap {
                RMat3 m;
                int src;
                const char* name;
            };
            std::vector<CrossMap> crosses;
            if (fi == 0) {
                crosses = {{b.t12, 1, "t12"}, {b.t13, 2, "t13"}};
            } else if (fi == 1) {
                crosses = {{b.t12.transpose(), 0, "t12^t"}, {b.t23, 2, "t23"}};
            } else {
                crosses = {{b.t13.transpose(), 0, "t13^t"}, {b.t23.transpose(), 1, "t23^t"}};
            }
            for (const auto& cm : crosses) {
                const auto& src = snap[static_cast<size_t>(cm.src)];
                for (size_t mi = 0; mi < src.size(); ++mi) {
                    std::string tag = std::string(cm.name) + "*" + short_name[static_cast<size_t>(cm.src)] +
                                      std::to_string(mi + 1);
                    detail::try_add(f, cm.m * src[mi].v, std::move(tag));
                }
            }

            const int a = (fi == 0) ? 1 : 0;
            const int c = (fi == 2) ? 1 : 2;
            const Mat39& unf = (fi == 0) ? u.t1_23 : (fi == 1) ? u.t2_13 : u.t3_12;
            for (size_t ai = 0; ai < snap[static_cast<size_t>(a)].size(); ++ai) {
                for (size_t ci = 0; ci < snap[static_cast<size_t>(c)].size(); ++ci) {
                    RVec3 v = unf * kron9(snap[static_cast<size_t>(a)][ai].v,
                                          snap[static_cast<size_t>(c)][ci].v);
                    std::string tag = "unf" + std::to_string(fi + 1) + "*(" +
                                      short_name[static_cast<size_t>(a)] + std::to_string(ai + 1) + "," +
                                      short_name[static_cast<size_t>(c)] + std::to_string(ci + 1) + ")";
                    detail::try_add(f, v, std::move(tag));
                }
            }
        }
    }

    for (auto& f : fams) {
        f.dim = detail::family_rank(f.members);
    }
    return fams;
}

/// Lexicographically first triple of member indices (1-based) spanning all
/// of R^3, or nothing when the family has rank below 3.
inline std::optional<std::array<int, 3>> pick_basis(const VectorFamily& f) {
    if (f.dim < 3) {
        return std::nullopt;
    }
    const int n = static_cast<int>(f.members.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                if (rank_tol({f.members[static_cast<size_t>(i)].v,
                              f.members[static_cast<size_t>(j)].v,
                              f.members[static_cast<size_t>(k)].v}) == 3) {
                    return std::array<int, 3>{i + 1, j + 1, k + 1};
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace luq
