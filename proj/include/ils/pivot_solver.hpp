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

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "ils/core.hpp"
#include "ils/decorrelate.hpp"
#include "ils/model.hpp"

namespace ils {

/// H1 = Ph * L * L' * Ph', with perm[k] the original index eliminated at step k.
struct PivotedFactor {
    std::vector<Eigen::Index> perm;
    Matrix L;
    Vector pivot_values;

    Eigen::Index dimension() const { return L.rows(); }

    Matrix permutation_matrix() const {
        const Eigen::Index n = dimension();
        Matrix ph = Matrix::Zero(n, n);
        for (Eigen::Index k = 0; k < n; ++k) ph(perm[k], k) = 1.0;
        return ph;
    }

    Matrix reconstruct() const {
        const Matrix ph = permutation_matrix();
        return ph * L * L.transpose() * ph.transpose();
    }

    /// z2 = Ph' z1.
    template <typename Vec>
    Vec to_elimination_order(const Vec& z1) const {
        Vec z2(z1.size());
        for (Eigen::Index k = 0; k < dimension(); ++k) z2[k] = z1[perm[k]];
        return z2;
    }

    /// z1 = Ph z2.
    template <typename Vec>
    Vec from_elimination_order(const Vec& z2) const {
        Vec z1(z2.size());
        for (Eigen::Index k = 0; k < dimension(); ++k) z1[perm[k]] = z2[k];
        return z1;
    }
};

/// Symmetric Gaussian elimination that always eliminates the smallest
/// remaining updated diagonal next. Ties go to the lowest original index.
inline PivotedFactor factorize_min_pivot(const Matrix& h1) {
    detail::require(h1.rows() == h1.cols(), ErrorKind::DimensionMismatch, "matrix must be square");
    const Eigen::Index n = h1.rows();
    PivotedFactor f;
    f.perm.resize(n);
    std::iota(f.perm.begin(), f.perm.end(), Eigen::Index{0});
    f.L = Matrix::Zero(n, n);
    f.pivot_values = Vector::Zero(n);
    if (n == 0) return f;

    Matrix work = symmetrize(h1);
    const double floor = 1e-12 * work.diagonal().maxCoeff();
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index best = k;
        for (Eigen::Index i = k + 1; i < n; ++i) {
            const double d = work(i, i);
            if (d < work(best, best) || (d == work(best, best) && f.perm[i] < f.perm[best])) best = i;
        }
        if (best != k) {
            work.row(k).swap(work.row(best));
            work.col(k).swap(work.col(best));
            f.L.row(k).head(k).swap(f.L.row(best).head(k));
            std::swap(f.perm[k], f.perm[best]);
        }
        const double pivot = work(k, k);
        if (!(pivot > floor)) throw Error(ErrorKind::NotSpd, "pivoted factorization broke down");
        f.pivot_values[k] = pivot;
        const double lkk = std::sqrt(pivot);
        f.L(k, k) = lkk;
        const Eigen::Index rest = n - k - 1;
        if (rest == 0) break;
        f.L.col(k).tail(rest) = work.col(k).tail(rest) / lkk;
        work.bottomRightCorner(rest, rest).noalias() -= f.L.col(k).tail(rest) * f.L.col(k).tail(rest).transpose();
    }
    return f;
}

/// Backward conditional rounding on the factor, last coordinate first. Each
/// coordinate is rounded exactly once. When `round_counts` is non-empty the
/// rounding of coordinate i increments round_counts[i].
inline IntVector solve_sequential(const PivotedFactor& factor, const Vector& z2_float,
                                  std::span<std::size_t> round_counts = {}) {
    const Eigen::Index n = factor.dimension();
    detail::require(z2_float.size() == n, ErrorKind::DimensionMismatch, "z2 length does not match the factor");
    detail::require(round_counts.empty() || static_cast<Eigen::Index>(round_counts.size()) == n,
                    ErrorKind::DimensionMismatch, "round_counts length does not match the factor");
    const Matrix& L = factor.L;
    IntVector z2(n);
    Vector residual(n);  // z2_int - z2_float for fixed coordinates
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double shift = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) shift += L(j, i) * residual[j];
        z2[i] = round_nearest(z2_float[i] - shift / L(i, i));
        residual[i] = static_cast<double>(z2[i]) - z2_float[i];
        if (!round_counts.empty()) ++round_counts[i];
    }
    return z2;
}

struct IntegerSolution {
    IntVector z_int;
    double objective_int = 0.0;
};

/// Componentwise rounding of the float solution.
inline IntegerSolution solve_round(const IntegerLsProblem& problem) {
    problem.validate();
    IntegerSolution s;
    s.z_int = round_nearest(problem.z_float);
    s.objective_int = objective_int(problem, s.z_int);
    return s;
}

struct PivotTrace {
    std::vector<std::size_t> round_counts;  // indexed by elimination position
    PivotedFactor factor;
};

/// One-step solver: optional decorrelation, min-pivot factorization,
/// sequential rounding, then back to the original coordinates.
inline IntegerSolution solve_pivot(const IntegerLsProblem& problem, bool use_decorrelation = true,
                                   PivotTrace* trace = nullptr) {
    problem.validate();
    const Eigen::Index q = problem.dimension();
    DecorrelatedProblem dp;
    if (use_decorrelation) {
        dp = decorrelate(problem);
    } else {
        dp.H1 = symmetrize(problem.H);
        dp.z1_float = problem.z_float;
        dp.map = UnimodularMap::identity(q);
        dp.c0 = problem.c0;
    }
    PivotedFactor factor = factorize_min_pivot(dp.H1);
    const Vector z2_float = factor.to_elimination_order(dp.z1_float);
    std::vector<std::size_t> counts(trace ? q : 0, 0);
    const IntVector z2 = solve_sequential(factor, z2_float, counts);
    const IntVector z1 = factor.from_elimination_order(z2);

    IntegerSolution s;
    s.z_int = dp.map.map_back(z1);
    s.objective_int = objective_int(problem, s.z_int);
    if (trace) {
        trace->round_counts = std::move(counts);
        trace->factor = std::move(factor);
    }
    return s;
}

}  // namespace ils
