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
#include <cstdint>
#include <limits>

#include "ils/core.hpp"
#include "ils/decorrelate.hpp"

namespace ils {

/// Integer bounds lower_i <= z_i <= upper_i. For the ILP and the default box
/// these bounds live in decorrelated coordinates.
struct Box {
    IntVector lower;
    IntVector upper;

    Eigen::Index dimension() const { return lower.size(); }

    void validate() const {
        detail::require(lower.size() == upper.size(), ErrorKind::DimensionMismatch, "box bound lengths differ");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            detail::require(lower[i] <= upper[i], ErrorKind::Infeasible, "box has lower bound above upper bound");
    }

    std::int64_t width(Eigen::Index i) const { return detail::checked_sub(upper[i], lower[i]); }

    bool contains(const IntVector& z) const {
        if (z.size() != dimension()) return false;
        for (Eigen::Index i = 0; i < z.size(); ++i)
            if (z[i] < lower[i] || z[i] > upper[i]) return false;
        return true;
    }

    IntVector clamp(const IntVector& z) const {
        IntVector out = z;
        for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = std::clamp(z[i], lower[i], upper[i]);
        return out;
    }

    /// Number of lattice points, saturating at uint64 max.
    std::uint64_t count() const {
        std::uint64_t total = 1;
        for (Eigen::Index i = 0; i < dimension(); ++i) {
            const auto n = static_cast<std::uint64_t>(width(i)) + 1;
            if (total > std::numeric_limits<std::uint64_t>::max() / n) return std::numeric_limits<std::uint64_t>::max();
            total *= n;
        }
        return total;
    }
};

/// kappa-sigma box around z1_float with sigma_i = sqrt(sigma2 * (H1^-1)_ii).
inline Box default_box(const DecorrelatedProblem& dp, double kappa = 3.0, double sigma2 = 1.0) {
    detail::require(kappa > 0.0 && sigma2 > 0.0, ErrorKind::InvalidArgument, "kappa and sigma2 must be positive");
    const Eigen::Index q = dp.H1.rows();
    const auto llt = checked_cholesky(dp.H1, ErrorKind::NotSpd, "H1 is not positive definite");
    // (H1^-1)_ii = |L^-1 e_i|^2
    const Vector var = Matrix(llt.matrixL().solve(Matrix::Identity(q, q))).colwise().squaredNorm().transpose();
    Box box{IntVector(q), IntVector(q)};
    for (Eigen::Index i = 0; i < q; ++i) {
        const double half = kappa * std::sqrt(sigma2 * var[i]);
        box.lower[i] = detail::to_int64(std::floor(dp.z1_float[i] - half));
        box.upper[i] = detail::to_int64(std::ceil(dp.z1_float[i] + half));
    }
    return box;
}

}  // namespace ils
