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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace ils {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

enum class ErrorKind {
    DimensionMismatch,
    RankDeficient,
    NotSpd,
    ReductionStall,
    IntegerOverflow,
    GenerationFailed,
    BoxTooLarge,
    BitOutOfRange,
    CapViolated,
    Infeasible,
    InvalidArgument,
    Parse,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::NotSpd: return "NotSpd";
        case ErrorKind::ReductionStall: return "ReductionStall";
        case ErrorKind::IntegerOverflow: return "IntegerOverflow";
        case ErrorKind::GenerationFailed: return "GenerationFailed";
        case ErrorKind::BoxTooLarge: return "BoxTooLarge";
        case ErrorKind::BitOutOfRange: return "BitOutOfRange";
        case ErrorKind::CapViolated: return "CapViolated";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

/// Every failure raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, const char* what) {
    if (!condition) throw Error(kind, what);
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorKind::IntegerOverflow, "integer addition overflow");
    return out;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorKind::IntegerOverflow, "integer multiplication overflow");
    return out;
}

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_sub_overflow(a, b, &out)) throw Error(ErrorKind::IntegerOverflow, "integer subtraction overflow");
    return out;
}

// Largest double magnitude that is still an exactly representable, in-range int64.
inline constexpr double kInt64Limit = 9.2233720368547748e18;

inline std::int64_t to_int64(double x) {
    if (!std::isfinite(x) || std::fabs(x) >= kInt64Limit)
        throw Error(ErrorKind::IntegerOverflow, "value does not fit in a 64-bit integer");
    return static_cast<std::int64_t>(x);
}

}  // namespace detail

/// Nearest integer, halves rounded away from zero. Shared by every solver.
inline std::int64_t round_nearest(double x) { return detail::to_int64(std::round(x)); }

inline IntVector round_nearest(const Vector& x) {
    IntVector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = round_nearest(x[i]);
    return out;
}

inline Vector to_real(const IntVector& z) { return z.cast<double>(); }

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Cholesky factor of a symmetric matrix, rejecting numerically singular input.
/// A pivot is treated as breakdown when it drops below `rel_tol` times
/// `scale`, which defaults to the largest diagonal entry.
inline Eigen::LLT<Matrix> checked_cholesky(const Matrix& m, ErrorKind kind, const char* what,
                                           double rel_tol = 1e-12, double scale = 0.0) {
    detail::require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "matrix must be square");
    Eigen::LLT<Matrix> llt(m);
    if (m.rows() == 0) return llt;
    if (llt.info() != Eigen::Success) throw Error(kind, what);
    const double max_diag = std::max(scale, m.diagonal().maxCoeff());
    const Vector l_diag = llt.matrixL().toDenseMatrix().diagonal();
    const double min_pivot = l_diag.cwiseAbs2().minCoeff();
    if (!(max_diag > 0.0) || !(min_pivot > rel_tol * max_diag)) throw Error(kind, what);
    return llt;
}

}  // namespace ils
