// Copyright 2026 The ils Authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// JSON file formats: mixed models, reduced problems, boxes and solve reports.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "ils/box.hpp"
#include "ils/core.hpp"
#include "ils/model.hpp"

namespace ils::io {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorKind::Parse, std::string("missing key \"") + key + "\"");
    return j.at(key);
}

template <typename F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

}  // namespace detail

inline Vector vector_from_json(const json& j) {
    return detail::guarded([&] {
        if (!j.is_array()) throw Error(ErrorKind::Parse, "expected an array");
        Vector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
        return v;
    });
}

inline IntVector int_vector_from_json(const json& j) {
    return detail::guarded([&] {
        if (!j.is_array()) throw Error(ErrorKind::Parse, "expected an array");
        IntVector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<std::int64_t>();
        return v;
    });
}

/// Array of rows. An empty array yields a 0 x 0 matrix.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_from_json(const json& j) {
    return detail::guarded([&] {
        if (!j.is_array()) throw Error(ErrorKind::Parse, "expected an array of rows");
        const auto rows = static_cast<Eigen::Index>(j.size());
        const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const json& row = j[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
                throw Error(ErrorKind::DimensionMismatch, "ragged matrix rows");
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<Scalar>();
        }
        return m;
    });
}

template <typename Derived>
json to_json_vector(const Eigen::MatrixBase<Derived>& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

template <typename Derived>
json to_json_matrix(const Eigen::MatrixBase<Derived>& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

enum class FileKind { MixedModel, ReducedProblem };

/// By key set: "y"/"B" means a mixed model, "H"/"z_float" a reduced problem.
inline FileKind detect_kind(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Parse, "top-level value must be an object");
    if (j.contains("y") && j.contains("B")) return FileKind::MixedModel;
    if (j.contains("H") && j.contains("z_float")) return FileKind::ReducedProblem;
    throw Error(ErrorKind::Parse, "cannot tell the file kind from its keys");
}

/// Keys: y, A (optional when there are no real parameters), B, and either P
/// (dense) or weights (diagonal); sigma2 defaults to 1.
inline MixedModel model_from_json(const json& j) {
    MixedModel model;
    model.y = vector_from_json(detail::field(j, "y"));
    const auto m = model.y.size();
    model.B = matrix_from_json(detail::field(j, "B"));
    model.A = j.contains("A") ? matrix_from_json(j.at("A")) : Matrix(m, 0);
    if (model.A.size() == 0) model.A = Matrix(m, 0);
    if (j.contains("P")) {
        model.P = matrix_from_json(j.at("P"));
    } else if (j.contains("weights")) {
        const Vector w = vector_from_json(j.at("weights"));
        model.P = w.asDiagonal();
    } else {
        throw Error(ErrorKind::Parse, "need either \"P\" or \"weights\"");
    }
    model.sigma2 = detail::guarded([&] { return j.value("sigma2", 1.0); });
    model.validate();
    return model;
}

/// Diagonal P is written as "weights".
inline json to_json(const MixedModel& model) {
    json j;
    j["y"] = to_json_vector(model.y);
    j["A"] = model.A.cols() == 0 ? json::array() : to_json_matrix(model.A);
    j["B"] = to_json_matrix(model.B);
    const Matrix off = model.P - Matrix(model.P.diagonal().asDiagonal());
    if (off.size() == 0 || off.cwiseAbs().maxCoeff() == 0.0)
        j["weights"] = to_json_vector(model.P.diagonal());
    else
        j["P"] = to_json_matrix(model.P);
    j["sigma2"] = model.sigma2;
    return j;
}

inline IntegerLsProblem problem_from_json(const json& j) {
    IntegerLsProblem p;
    p.H = matrix_from_json(detail::field(j, "H"));
    p.z_float = vector_from_json(detail::field(j, "z_float"));
    p.c0 = detail::guarded([&] { return j.value("c0", 0.0); });
    p.validate();
    return p;
}

inline json to_json(const IntegerLsProblem& p) {
    return json{{"H", to_json_matrix(p.H)}, {"z_float", to_json_vector(p.z_float)}, {"c0", p.c0}};
}

inline Box box_from_json(const json& j) {
    Box box{int_vector_from_json(detail::field(j, "lower")), int_vector_from_json(detail::field(j, "upper"))};
    box.validate();
    return box;
}

inline json to_json(const Box& box) {
    return json{{"lower", to_json_vector(box.lower)}, {"upper", to_json_vector(box.upper)}};
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, path + ": " + e.what());
    }
}

inline json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

// ---------------------------------------------------------------------------
// Solve reports

/// Exact equality that tolerates differing shapes.
template <typename A, typename B>
bool same(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

struct DecorrelationInfo {
    IntMatrix gt;
    Matrix h1;
    bool reduced = false;
    std::uint64_t steps = 0;

    friend bool operator==(const DecorrelationInfo& a, const DecorrelationInfo& b) {
        return same(a.gt, b.gt) && same(a.h1, b.h1) && a.reduced == b.reduced && a.steps == b.steps;
    }
};

struct SolveStats {
    double wall_ms = 0.0;
    std::optional<std::uint64_t> nodes;
    std::optional<std::int64_t> bits;
    std::optional<std::int64_t> products;
    std::optional<std::uint64_t> candidates;

    bool operator==(const SolveStats&) const = default;
};

struct SolveReport {
    std::string method;
    IntVector z_int;
    std::optional<Vector> beta;
    double objective_int = 0.0;
    std::optional<double> objective_full;
    double c0 = 0.0;
    std::optional<DecorrelationInfo> decorrelation;
    SolveStats stats;
    std::optional<bool> matches_oracle;

    friend bool operator==(const SolveReport& a, const SolveReport& b) {
        const bool beta_same = a.beta.has_value() == b.beta.has_value() && (!a.beta || same(*a.beta, *b.beta));
        return a.method == b.method && same(a.z_int, b.z_int) && beta_same && a.objective_int == b.objective_int &&
               a.objective_full == b.objective_full && a.c0 == b.c0 && a.decorrelation == b.decorrelation &&
               a.stats == b.stats && a.matches_oracle == b.matches_oracle;
    }
};

inline json to_json(const SolveReport& r) {
    json j;
    j["method"] = r.method;
    j["z_int"] = to_json_vector(r.z_int);
    if (r.beta) j["beta"] = to_json_vector(*r.beta);
    j["objective_int"] = r.objective_int;
    if (r.objective_full) j["objective_full"] = *r.objective_full;
    j["c0"] = r.c0;
    if (r.decorrelation) {
        j["decorrelation"] = json{{"Gt", to_json_matrix(r.decorrelation->gt)},
                                  {"H1", to_json_matrix(r.decorrelation->h1)},
                                  {"reduced", r.decorrelation->reduced},
                                  {"steps", r.decorrelation->steps}};
    }
    json stats{{"wall_ms", r.stats.wall_ms}};
    if (r.stats.nodes) stats["nodes"] = *r.stats.nodes;
    if (r.stats.bits) stats["bits"] = *r.stats.bits;
    if (r.stats.products) stats["products"] = *r.stats.products;
    if (r.stats.candidates) stats["candidates"] = *r.stats.candidates;
    j["stats"] = std::move(stats);
    if (r.matches_oracle) j["matches_oracle"] = *r.matches_oracle;
    return j;
}

inline SolveReport report_from_json(const json& j) {
    return detail::guarded([&] {
        SolveReport r;
        r.method = detail::field(j, "method").get<std::string>();
        r.z_int = int_vector_from_json(detail::field(j, "z_int"));
        if (j.contains("beta")) r.beta = vector_from_json(j.at("beta"));
        r.objective_int = detail::field(j, "objective_int").get<double>();
        if (j.contains("objective_full")) r.objective_full = j.at("objective_full").get<double>();
        r.c0 = detail::field(j, "c0").get<double>();
        if (j.contains("decorrelation")) {
            const json& d = j.at("decorrelation");
            DecorrelationInfo info;
            info.gt = matrix_from_json<std::int64_t>(detail::field(d, "Gt"));
            info.h1 = matrix_from_json(detail::field(d, "H1"));
            info.reduced = detail::field(d, "reduced").get<bool>();
            info.steps = detail::field(d, "steps").get<std::uint64_t>();
            r.decorrelation = std::move(info);
        }
        const json& s = detail::field(j, "stats");
        r.stats.wall_ms = detail::field(s, "wall_ms").get<double>();
        if (s.contains("nodes")) r.stats.nodes = s.at("nodes").get<std::uint64_t>();
        if (s.contains("bits")) r.stats.bits = s.at("bits").get<std::int64_t>();
        if (s.contains("products")) r.stats.products = s.at("products").get<std::int64_t>();
        if (s.contains("candidates")) r.stats.candidates = s.at("candidates").get<std::uint64_t>();
        if (j.contains("matches_oracle")) r.matches_oracle = j.at("matches_oracle").get<bool>();
        return r;
    });
}

}  // namespace ils::io
