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

// Integer decorrelation of an SPD weight matrix by elementary unimodular
// congruences, H1 = Gt * H * Gt', until every off-diagonal entry satisfies
// |h_ij| <= min(h_ii, h_jj) / 2.

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ils/core.hpp"
#include "ils/model.hpp"

namespace ils {

/// Exact integer determinant by fraction-free (Bareiss) elimination.
inline std::int64_t integer_determinant(IntMatrix a) {
    detail::require(a.rows() == a.cols(), ErrorKind::DimensionMismatch, "determinant of a non-square matrix");
    const Eigen::Index n = a.rows();
    if (n == 0) return 1;
    std::int64_t sign = 1;
    std::int64_t prev = 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            Eigen::Index swap = k + 1;
            while (swap < n && a(swap, k) == 0) ++swap;
            if (swap == n) return 0;
            a.row(k).swap(a.row(swap));
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i) {
            for (Eigen::Index j = k + 1; j < n; ++j) {
                // Bareiss guarantees the division is exact.
                const std::int64_t num = detail::checked_sub(detail::checked_mul(a(i, j), a(k, k)),
                                                             detail::checked_mul(a(i, k), a(k, j)));
                a(i, j) = num / prev;
            }
        }
        prev = a(k, k);
    }
    return detail::checked_mul(sign, a(n - 1, n - 1));
}

inline bool is_unimodular(const IntMatrix& g) {
    if (g.rows() != g.cols()) return false;
    const std::int64_t det = integer_determinant(g);
    return det == 1 || det == -1;
}

/// Elementary step G1 = I + multiplier * e_target e_source'. Applying it adds
/// `multiplier` times row/column `source` to row/column `target`.
struct ElementaryStep {
    Eigen::Index target = 0;
    Eigen::Index source = 0;
    std::int64_t multiplier = 0;

    bool is_identity() const { return multiplier == 0; }

    IntMatrix matrix(Eigen::Index n) const {
        IntMatrix g = IntMatrix::Identity(n, n);
        if (!is_identity()) g(target, source) = multiplier;
        return g;
    }
};

/// Accumulated transform Gt together with (Gt')^-1, both kept exact.
/// Original coordinates z and decorrelated coordinates z1 relate through
/// z1 = (Gt')^-1 z and z = Gt' z1.
struct UnimodularMap {
    IntMatrix gt;
    IntMatrix gt_inv_t;

    static UnimodularMap identity(Eigen::Index n) {
        return {IntMatrix::Identity(n, n), IntMatrix::Identity(n, n)};
    }

    Eigen::Index dimension() const { return gt.rows(); }

    /// Left-multiplies Gt by the step and updates the inverse transpose with
    /// the step's inverse, which is the same elementary matrix with negated
    /// multiplier.
    void apply(const ElementaryStep& step) {
        if (step.is_identity()) return;
        const Eigen::Index n = dimension();
        for (Eigen::Index c = 0; c < n; ++c)
            gt(step.target, c) = detail::checked_add(gt(step.target, c),
                                                     detail::checked_mul(step.multiplier, gt(step.source, c)));
        // (G1^-1)' = I - m e_source e_target': row source -= m * row target.
        for (Eigen::Index c = 0; c < n; ++c)
            gt_inv_t(step.source, c) = detail::checked_sub(
                gt_inv_t(step.source, c), detail::checked_mul(step.multiplier, gt_inv_t(step.target, c)));
    }

    IntVector map_back(const IntVector& z1) const { return multiply(gt.transpose(), z1); }

    IntVector map_forward(const IntVector& z) const { return multiply(gt_inv_t, z); }

    Vector map_forward(const Vector& z) const { return gt_inv_t.cast<double>() * z; }

private:
    static IntVector multiply(const IntMatrix& m, const IntVector& v) {
        detail::require(m.cols() == v.size(), ErrorKind::DimensionMismatch, "vector length does not match the map");
        IntVector out = IntVector::Zero(m.rows());
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            std::int64_t acc = 0;
            for (Eigen::Index j = 0; j < m.cols(); ++j) acc = detail::checked_add(acc, detail::checked_mul(m(i, j), v[j]));
            out[i] = acc;
        }
        return out;
    }
};

struct DecorrelatedProblem {
    Matrix H1;
    Vector z1_float;
    UnimodularMap map;
    double c0 = 0.0;
    std::size_t steps = 0;
    std::size_t sweeps = 0;

    IntegerLsProblem as_problem() const { return {H1, z1_float, c0}; }
};

namespace detail {

inline double max_diagonal(const Matrix& a) { return a.rows() == 0 ? 0.0 : a.diagonal().maxCoeff(); }

// Absolute slack used both to trigger a step and to accept the reduced matrix.
// Triggering at half the acceptance slack keeps steps from oscillating on
// entries that sit at |h_ij| = min/2 up to rounding.
inline constexpr double kReducedSlack = 1e-12;

}  // namespace detail

/// |h_ij| <= min(h_ii, h_jj)/2 + tol for every i != j.
inline bool check_reduced(const Matrix& h1, double tol = 0.0) {
    for (Eigen::Index i = 0; i < h1.rows(); ++i)
        for (Eigen::Index j = 0; j < h1.cols(); ++j)
            if (i != j && std::fabs(h1(i, j)) > 0.5 * std::min(h1(i, i), h1(j, j)) + tol) return false;
    return true;
}

/// The elementary step that reduces the larger of a_ii, a_jj by the nearest
/// integer multiple of the smaller one. Identity when the pair already
/// satisfies the reduction condition. Ties a_ii == a_jj reduce a_jj.
inline ElementaryStep reduction_step(const Matrix& a, Eigen::Index i, Eigen::Index j) {
    detail::require(i != j && i >= 0 && j >= 0 && i < a.rows() && j < a.rows(), ErrorKind::InvalidArgument,
                    "reduction_step needs two distinct valid indices");
    const double a_min = std::min(a(i, i), a(j, j));
    const double slack = 0.5 * detail::kReducedSlack * detail::max_diagonal(a);
    if (!(std::fabs(a(i, j)) > 0.5 * a_min + slack)) return {};
    const std::int64_t r = round_nearest(a(i, j) / a_min);
    if (a(i, i) <= a(j, j)) return {j, i, -r};
    return {i, j, -r};
}

/// In-place congruence a <- G1 a G1' for an elementary step.
inline void apply_congruence(Matrix& a, const ElementaryStep& step) {
    if (step.is_identity()) return;
    const double m = static_cast<double>(step.multiplier);
    a.row(step.target) += m * a.row(step.source);
    a.col(step.target) += m * a.col(step.source);
}

/// Gt * H * Gt' accumulated in extended precision.
inline Matrix congruence(const IntMatrix& gt, const Matrix& h) {
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const LMatrix g = gt.cast<long double>();
    const LMatrix out = g * h.cast<long double>() * g.transpose();
    return symmetrize(out.cast<double>());
}

/// Sweeps all pairs i < j in row-major order, applying reduction steps, and
/// rebuilds H1 from the original H after each sweep. Stops after a sweep
/// that changes nothing.
inline DecorrelatedProblem decorrelate(const IntegerLsProblem& problem) {
    problem.validate();
    const Matrix h = symmetrize(problem.H);
    checked_cholesky(h, ErrorKind::NotSpd, "H is not positive definite");
    const Eigen::Index q = h.rows();
    const std::size_t cap = 1000 * static_cast<std::size_t>(q) * static_cast<std::size_t>(q);

    DecorrelatedProblem out;
    out.map = UnimodularMap::identity(q);
    out.c0 = problem.c0;
    Matrix work = h;
    for (;;) {
        bool changed = false;
        for (Eigen::Index i = 0; i < q; ++i) {
            for (Eigen::Index j = i + 1; j < q; ++j) {
                const ElementaryStep step = reduction_step(work, i, j);
                if (step.is_identity()) continue;
                if (++out.steps > cap) throw Error(ErrorKind::ReductionStall, "step cap exceeded");
                apply_congruence(work, step);
                out.map.apply(step);
                changed = true;
            }
        }
        ++out.sweeps;
        if (changed) work = congruence(out.map.gt, h);
        if (!changed) break;
    }
    out.H1 = work;
    out.z1_float = out.map.map_forward(problem.z_float);
    return out;
}

}  // namespace ils
