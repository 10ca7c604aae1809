#pragma once

/// JSON state files: a density matrix given as real and imaginary planes, or
/// raw Bloch tensors for two and three qubits. The density form is validated
/// (Hermitian, unit trace, positive) at load; Bloch forms are accepted as-is
/// so that non-physical tensor data can still be fingerprinted.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "luq/bloch.hpp"

namespace luq {

/// Malformed file: bad JSON, unknown kind, missing fields, wrong shapes.
struct StateParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Well-formed density input that fails the density-matrix invariants.
struct StateValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateFile {
    std::string kind;  // "density", "bloch2", or "bloch3"
    int qubits = 0;
    std::optional<DensityMatrix> density;
    std::optional<BlochTensor2> bloch2;
    std::optional<BlochTensor3> bloch3;

    /// Bloch view of the state; converts on the fly for density inputs.
    BlochTensor2 as_bloch2() const {
        if (bloch2) {
            return *bloch2;
        }
        if (density && qubits == 2) {
            return to_bloch2(*density);
        }
        throw StateParseError("state is not a 2-qubit state");
    }

    BlochTensor3 as_bloch3() const {
        if (bloch3) {
            return *bloch3;
        }
        if (density && qubits == 3) {
            return to_bloch3(*density);
        }
        throw StateParseError("state is not a 3-qubit state");
    }
};

namespace detail {

inline std::vector<double> flat_field(const nlohmann::json& j, const char* name, size_t len) {
    if (!j.contains(name)) {
        throw StateParseError(std::string("missing field: ") + name);
    }
    const auto& node = j.at(name);
    if (!node.is_array() || node.size() != len) {
        std::ostringstream os;
        os << "field " << name << " must be an array of " << len << " numbers";
        throw StateParseError(os.str());
    }
    std::vector<double> out;
    out.reserve(len);
    for (const auto& v : node) {
        if (!v.is_number()) {
            throw StateParseError(std::string("field ") + name + " has a non-numeric entry");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

inline RVec3 vec_field(const nlohmann::json& j, const char* name) {
    const auto flat = flat_field(j, name, 3);
    return RVec3(flat[0], flat[1], flat[2]);
}

inline RMat3 mat_field(const nlohmann::json& j, const char* name) {
    const auto flat = flat_field(j, name, 9);
    RMat3 m;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            m(r, c) = flat[static_cast<size_t>(3 * r + c)];
        }
    }
    return m;
}

inline Eigen::MatrixXd plane_field(const nlohmann::json& j, const char* name, int dim) {
    if (!j.contains(name)) {
        throw StateParseError(std::string("missing field: ") + name);
    }
    const auto& node = j.at(name);
    if (!node.is_array() || static_cast<int>(node.size()) != dim) {
        std::ostringstream os;
        os << "field " << name << " must be " << dim << " rows of " << dim << " numbers";
        throw StateParseError(os.str());
    }
    Eigen::MatrixXd m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        const auto& row = node.at(static_cast<size_t>(r));
        if (!row.is_array() || static_cast<int>(row.size()) != dim) {
            std::ostringstream os;
            os << "field " << name << " must be " << dim << " rows of " << dim << " numbers";
            throw StateParseError(os.str());
        }
        for (int c = 0; c < dim; ++c) {
            const auto& v = row.at(static_cast<size_t>(c));
            if (!v.is_number()) {
                throw StateParseError(std::string("field ") + name + " has a non-numeric entry");
            }
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

}  // namespace detail

inline StateFile parse_state(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw StateParseError("state file must be an object with a string field 'kind'");
    }
    StateFile s;
    s.kind = j.at("kind").get<std::string>();
    if (s.kind == "density") {
        if (!j.contains("dim") || !j.at("dim").is_number_integer()) {
            throw StateParseError("density state needs an integer field 'dim'");
        }
        const int dim = j.at("dim").get<int>();
        if (dim != 4 && dim != 8) {
            throw StateParseError("density state dim must be 4 or 8");
        }
        const Eigen::MatrixXd re = detail::plane_field(j, "re", dim);
        const Eigen::MatrixXd im = detail::plane_field(j, "im", dim);
        CMatX m = re.cast<std::complex<double>>() +
                  std::complex<double>(0.0, 1.0) * im.cast<std::complex<double>>();
        try {
            s.density = DensityMatrix::make(std::move(m));
        } catch (const std::invalid_argument& e) {
            throw StateValidationError(e.what());
        }
        s.qubits = s.density->qubits();
        return s;
    }
    if (s.kind == "bloch2") {
        BlochTensor2 b;
        b.t1 = detail::vec_field(j, "t1");
        b.t2 = detail::vec_field(j, "t2");
        b.t12 = detail::mat_field(j, "t12");
        s.bloch2 = b;
        s.qubits = 2;
        return s;
    }
    if (s.kind == "bloch3") {
        BlochTensor3 b;
        b.t1 = detail::vec_field(j, "t1");
        b.t2 = detail::vec_field(j, "t2");
        b.t3 = detail::vec_field(j, "t3");
        b.t12 = detail::mat_field(j, "t12");
        b.t13 = detail::mat_field(j, "t13");
        b.t23 = detail::mat_field(j, "t23");
        const auto flat = detail::flat_field(j, "t123", 27);
        std::copy(flat.begin(), flat.end(), b.t123.begin());
        s.bloch3 = b;
        s.qubits = 3;
        return s;
    }
    throw StateParseError("unknown state kind: " + s.kind);
}

inline StateFile load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw StateParseError("cannot open file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw StateParseError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return parse_state(j);
}

inline nlohmann::json density_json(const DensityMatrix& rho) {
    const int dim = rho.dim();
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (int r = 0; r < dim; ++r) {
        nlohmann::json re_row = nlohmann::json::array();
        nlohmann::json im_row = nlohmann::json::array();
        for (int c = 0; c < dim; ++c) {
            re_row.push_back(rho.mat(r, c).real());
            im_row.push_back(rho.mat(r, c).imag());
        }
        re.push_back(std::move(re_row));
        im.push_back(std::move(im_row));
    }
    return nlohmann::json{{"kind", "density"}, {"dim", dim}, {"re", std::move(re)},
                          {"im", std::move(im)}};
}

namespace detail {

inline nlohmann::json vec_json(const RVec3& v) {
    return nlohmann::json::array({v(0), v(1), v(2)});
}

inline nlohmann::json mat_json(const RMat3& m) {
    nlohmann::json out = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            out.push_back(m(r, c));
        }
    }
    return out;
}

}  // namespace detail

inline nlohmann::json bloch2_json(const BlochTensor2& b) {
    return nlohmann::json{{"kind", "bloch2"},
                          {"t1", detail::vec_json(b.t1)},
                          {"t2", detail::vec_json(b.t2)},
                          {"t12", detail::mat_json(b.t12)}};
}

inline nlohmann::json bloch3_json(const BlochTensor3& b) {
    nlohmann::json t123 = nlohmann::json::array();
    for (double v : b.t123) {
        t123.push_back(v);
    }
    return nlohmann::json{{"kind", "bloch3"},
                          {"t1", detail::vec_json(b.t1)},
                          {"t2", detail::vec_json(b.t2)},
                          {"t3", detail::vec_json(b.t3)},
                          {"t12", detail::mat_json(b.t12)},
                          {"t13", detail::mat_json(b.t13)},
                          {"t23", detail::mat_json(b.t23)},
                          {"t123", std::move(t123)}};
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path);
    }
    out << j.dump(2) << "\n";
}

}  // namespace luq
