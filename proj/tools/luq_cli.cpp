#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "luq/luq.hpp"

namespace {

constexpr int kExitNotEquivalent = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvalidState = 3;
constexpr int kExitInconclusive = 4;

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json fingerprint_json(const luq::Fingerprint2& f, double tol) {
    nlohmann::json l;
    for (size_t i = 0; i < 9; ++i) {
        l[luq::kL2Names[i]] = f.L[i];
    }
    return nlohmann::json{{"kind", "fingerprint2"},
                          {"tol", tol},
                          {"dims", {f.dims[0], f.dims[1]}},
                          {"L", std::move(l)},
                          {"triple_mu", optional_json(f.triple_mu)},
                          {"triple_nu", optional_json(f.triple_nu)},
                          {"tr_alpha", {f.tr_alpha[0], f.tr_alpha[1]}},
                          {"det_t12", f.det_t12},
                          {"inv_I", f.inv_I}};
}

nlohmann::json dense_json(const Eigen::MatrixXd& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        out.push_back(std::move(row));
    }
    return out;
}

nlohmann::json fingerprint_json(const luq::Fingerprint3& f, double tol) {
    nlohmann::json tr_cal = nlohmann::json::array();
    nlohmann::json quad_t = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
        tr_cal.push_back({f.aux_traces[static_cast<size_t>(i)][0],
                          f.aux_traces[static_cast<size_t>(i)][1],
                          f.aux_traces[static_cast<size_t>(i)][2]});
        quad_t.push_back({f.aux_quad[static_cast<size_t>(i)][0],
                          f.aux_quad[static_cast<size_t>(i)][1],
                          f.aux_quad[static_cast<size_t>(i)][2]});
    }
    return nlohmann::json{{"kind", "fingerprint3"},
                          {"tol", tol},
                          {"depth", f.depth},
                          {"truncated", f.truncated},
                          {"dims", {f.dims[0], f.dims[1], f.dims[2]}},
                          {"gram_mu", dense_json(f.gram_mu)},
                          {"gram_nu", dense_json(f.gram_nu)},
                          {"gram_omega", dense_json(f.gram_omega)},
                          {"triple_mu", optional_json(f.triple_mu)},
                          {"triple_nu", optional_json(f.triple_nu)},
                          {"triple_omega", optional_json(f.triple_omega)},
                          {"tr_cal", std::move(tr_cal)},
                          {"quad_t", std::move(quad_t)}};
}

int cmd_fingerprint(const std::string& path, double tol, int depth, bool as_json) {
    const luq::StateFile s = luq::load_state(path);
    if (s.qubits == 2) {
        const auto f = luq::fingerprint2(s.as_bloch2());
        if (as_json) {
            std::cout << fingerprint_json(f, tol).dump(2) << "\n";
        } else {
            std::cout << "tol " << tol << "\n" << luq::canonical_text(f, tol);
        }
    } else {
        const auto f = luq::fingerprint3(s.as_bloch3(), depth);
        if (as_json) {
            std::cout << fingerprint_json(f, tol).dump(2) << "\n";
        } else {
            std::cout << "tol " << tol << "\n" << luq::canonical_text(f, tol);
        }
    }
    return 0;
}

void print_witness(const luq::LocalUnitaryWitness& w) {
    std::cout << std::setprecision(17);
    for (size_t q = 0; q < w.rotations.size(); ++q) {
        std::cout << "rotation O" << q + 1 << "\n";
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                std::cout << w.rotations[q](r, c) << (c == 2 ? "\n" : " ");
            }
        }
    }
    for (size_t q = 0; q < w.unitaries.size(); ++q) {
        std::cout << "unitary U" << q + 1 << "\n";
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                const auto v = w.unitaries[q](r, c);
                std::cout << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << "i"
                          << (c == 1 ? "\n" : " ");
            }
        }
    }
    std::cout << "residual " << w.residual << "\n";
}

int report_verdict(const luq::Verdict& v, bool witness) {
    switch (v.kind) {
        case luq::VerdictKind::Equivalent:
            std::cout << "Equivalent\n";
            if (witness && v.witness) {
                print_witness(*v.witness);
            }
            return 0;
        case luq::VerdictKind::NotEquivalent:
            std::cout << "NotEquivalent\n";
            if (v.certificate) {
                std::cout << "certificate " << v.certificate->text() << "\n";
            }
            return kExitNotEquivalent;
        case luq::VerdictKind::Inconclusive:
        default:
            std::cout << "Inconclusive\n";
            if (!v.reason.empty()) {
                std::cout << "reason " << v.reason << "\n";
            }
            return kExitInconclusive;
    }
}

int cmd_equiv(const std::string& path_a, const std::string& path_b, double tol, int depth,
              bool witness) {
    const luq::StateFile a = luq::load_state(path_a);
    const luq::StateFile b = luq::load_state(path_b);
    if (a.kind != b.kind || a.qubits != b.qubits) {
        std::cerr << "error: state kinds differ (" << a.kind << "/" << a.qubits << " qubits vs "
                  << b.kind << "/" << b.qubits << " qubits)\n";
        return kExitUsage;
    }
    std::cout << "tol " << tol << " depth " << depth << "\n";
    const luq::Verdict v = a.qubits == 2
                               ? luq::decide2(a.as_bloch2(), b.as_bloch2(), tol)
                               : luq::decide3(a.as_bloch3(), b.as_bloch3(), depth, tol);
    return report_verdict(v, witness);
}

luq::DensityMatrix bell_state() {
    luq::CMatX m = luq::CMatX::Zero(4, 4);
    m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 0.5;
    return luq::DensityMatrix::make(std::move(m));
}

luq::DensityMatrix ghz_state() {
    luq::CMatX m = luq::CMatX::Zero(8, 8);
    m(0, 0) = m(0, 7) = m(7, 0) = m(7, 7) = 0.5;
    return luq::DensityMatrix::make(std::move(m));
}

luq::DensityMatrix seeded_frame(const luq::DensityMatrix& rho, luq::RngSeed seed) {
    if (seed == 0) {
        return rho;
    }
    auto rng = luq::make_rng(seed);
    std::vector<luq::CMat2> us;
    for (int q = 0; q < rho.qubits(); ++q) {
        us.push_back(luq::haar_su2(rng));
    }
    return luq::apply_local(rho, us);
}

nlohmann::json unitary_json(const luq::CMat2& u) {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (int r = 0; r < 2; ++r) {
        nlohmann::json re_row = nlohmann::json::array();
        nlohmann::json im_row = nlohmann::json::array();
        for (int c = 0; c < 2; ++c) {
            re_row.push_back(u(r, c).real());
            im_row.push_back(u(r, c).imag());
        }
        re.push_back(std::move(re_row));
        im.push_back(std::move(im_row));
    }
    return nlohmann::json{{"re", std::move(re)}, {"im", std::move(im)}};
}

void write_state(const std::string& path, const nlohmann::json& j) {
    luq::save_json(path, j);
    std::cout << "wrote " << path << "\n";
}

int cmd_gen(const std::string& kind, int qubits, luq::RngSeed seed, const std::string& out) {
    std::string stem = out;
    if (stem.size() > 5 && stem.ends_with(".json")) {
        stem.resize(stem.size() - 5);
    }
    const int dim = qubits == 2 ? 4 : 8;
    if (kind == "random") {
        write_state(out, luq::density_json(luq::random_density(dim, seed)));
        return 0;
    }
    if (kind == "orbit") {
        const auto rho = luq::random_density(dim, seed);
        const auto pair = luq::orbit_pair(rho, seed ^ 0x9e3779b97f4a7c15ULL);
        write_state(stem + "_a.json", luq::density_json(rho));
        write_state(stem + "_b.json", luq::density_json(pair.state));
        nlohmann::json us = nlohmann::json::array();
        for (const auto& u : pair.unitaries) {
            us.push_back(unitary_json(u));
        }
        write_state(stem + "_witness.json",
                    nlohmann::json{{"kind", "witness"}, {"qubits", qubits},
                                   {"unitaries", std::move(us)}});
        return 0;
    }
    if (kind == "counterexample") {
        if (qubits != 2) {
            std::cerr << "error: counterexample generation is 2-qubit only\n";
            return kExitUsage;
        }
        const auto [a, b] = luq::counterexample_pair(seed);
        write_state(stem + "_a.json", luq::bloch2_json(a));
        write_state(stem + "_b.json", luq::bloch2_json(b));
        return 0;
    }
    if (kind == "ghz") {
        if (qubits != 3) {
            std::cerr << "error: ghz generation is 3-qubit only\n";
            return kExitUsage;
        }
        write_state(out, luq::density_json(seeded_frame(ghz_state(), seed)));
        return 0;
    }
    if (kind == "bell") {
        if (qubits != 2) {
            std::cerr << "error: bell generation is 2-qubit only\n";
            return kExitUsage;
        }
        write_state(out, luq::density_json(seeded_frame(bell_state(), seed)));
        return 0;
    }
    std::cerr << "error: unknown kind: " << kind << "\n";
    return kExitUsage;
}

struct DisjointSets {
    std::vector<size_t> parent;

    explicit DisjointSets(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }

    size_t find(size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }

    void merge(size_t a, size_t b) { parent[find(a)] = find(b); }
};

int cmd_classify(const std::string& dir, double tol, int depth) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        std::cerr << "error: not a directory: " << dir << "\n";
        return kExitUsage;
    }
    std::vector<std::string> candidates;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            candidates.push_back(entry.path().filename().string());
        }
    }
    std::sort(candidates.begin(), candidates.end());
    std::cout << "tol " << tol << " depth " << depth << "\n";

    std::vector<std::string> names;
    std::vector<luq::StateFile> states;
    for (const auto& name : candidates) {
        std::ifstream in(fs::path(dir) / name);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw luq::StateParseError("invalid JSON in " + name + ": " + e.what());
        }
        if (j.is_object() && j.value("kind", "") == "witness") {
            continue;
        }
        names.push_back(name);
        states.push_back(luq::parse_state(j));
    }
    if (names.empty()) {
        std::cout << "classes 0\n";
        return 0;
    }
    for (size_t i = 1; i < states.size(); ++i) {
        if (states[i].kind != states[0].kind || states[i].qubits != states[0].qubits) {
            std::cerr << "error: mixed state kinds in directory (" << names[0] << " is "
                      << states[0].kind << "/" << states[0].qubits << " qubits, " << names[i]
                      << " is " << states[i].kind << "/" << states[i].qubits << " qubits)\n";
            return kExitUsage;
        }
    }

    const size_t n = names.size();
    const bool two_qubit = states[0].qubits == 2;
    std::vector<luq::Fingerprint2> f2;
    std::vector<luq::Fingerprint3> f3;
    for (const auto& s : states) {
        if (two_qubit) {
            f2.push_back(luq::fingerprint2(s.as_bloch2()));
        } else {
            f3.push_back(luq::fingerprint3(s.as_bloch3(), depth));
        }
    }

    DisjointSets sets(n);
    std::vector<std::string> inconclusive;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const auto cmp = two_qubit ? luq::fingerprints_equal(f2[i], f2[j], tol)
                                       : luq::fingerprints_equal(f3[i], f3[j], tol);
            if (!cmp.equal) {
                continue;
            }
            const luq::Verdict v =
                two_qubit ? luq::decide2(states[i].as_bloch2(), states[j].as_bloch2(), tol)
                          : luq::decide3(states[i].as_bloch3(), states[j].as_bloch3(), depth, tol);
            if (v.kind == luq::VerdictKind::Equivalent) {
                sets.merge(i, j);
            } else if (v.kind == luq::VerdictKind::Inconclusive) {
                inconclusive.push_back(names[i] + " " + names[j] + ": " + v.reason);
            }
        }
    }

    std::map<size_t, std::vector<std::string>> classes;
    for (size_t i = 0; i < n; ++i) {
        classes[sets.find(i)].push_back(names[i]);
    }
    std::vector<std::vector<std::string>> ordered;
    ordered.reserve(classes.size());
    for (auto& [root, members] : classes) {
        ordered.push_back(std::move(members));
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    std::cout << "classes " << ordered.size() << "\n";
    for (size_t c = 0; c < ordered.size(); ++c) {
        std::cout << "class " << c + 1 << ":";
        for (const auto& name : ordered[c]) {
            std::cout << " " << name;
        }
        std::cout << "\n";
    }
    std::cout << "inconclusive " << inconclusive.size() << "\n";
    for (const auto& line : inconclusive) {
        std::cout << "pair " << line << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local-unitary equivalence toolkit for 2- and 3-qubit states"};
    app.require_subcommand(1);

    double tol = 1e-9;
    int depth = 2;
    bool as_json = false;
    bool as_text = false;
    bool witness = false;
    std::string file_a, file_b, dir, kind, out;
    int qubits = 2;
    std::uint64_t seed = 0;

    auto* fp = app.add_subcommand("fingerprint", "print the invariant fingerprint of a state");
    fp->add_option("file", file_a, "state file")->required();
    fp->add_option("--tol", tol, "comparison tolerance");
    fp->add_option("--depth", depth, "family construction depth (3-qubit)");
    auto* jf = fp->add_flag("--json", as_json, "JSON output");
    fp->add_flag("--text", as_text, "text output (default)")->excludes(jf);

    auto* eq = app.add_subcommand("equiv", "decide local-unitary equivalence of two states");
    eq->add_option("fileA", file_a, "first state file")->required();
    eq->add_option("fileB", file_b, "second state file")->required();
    eq->add_option("--tol", tol, "comparison tolerance");
    eq->add_option("--depth", depth, "family construction depth (3-qubit)");
    eq->add_flag("--witness", witness, "print the aligning rotations and unitaries");

    auto* gen = app.add_subcommand("gen", "generate state files for testing");
    gen->add_option("--kind", kind, "random|orbit|counterexample|ghz|bell")->required();
    gen->add_option("--qubits", qubits, "2 or 3")->check(CLI::IsMember({2, 3}));
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", out, "output path (pair kinds write <out>_a/_b)")->required();

    auto* cl = app.add_subcommand("classify", "partition a directory of states into orbits");
    cl->add_option("directory", dir, "directory of state files")->required();
    cl->add_option("--tol", tol, "comparison tolerance");
    cl->add_option("--depth", depth, "family construction depth (3-qubit)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    if (gen->parsed() && gen->count("--qubits") == 0 && kind == "ghz") {
        qubits = 3;
    }

    try {
        if (fp->parsed()) {
            return cmd_fingerprint(file_a, tol, depth, as_json);
        }
        if (eq->parsed()) {
            return cmd_equiv(file_a, file_b, tol, depth, witness);
        }
        if (gen->parsed()) {
            return cmd_gen(kind, qubits, seed, out);
        }
        return cmd_classify(dir, tol, depth);
    } catch (const luq::StateValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidState;
    } catch (const luq::StateParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
