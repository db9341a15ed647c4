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

// Random instance generators and reference computations shared by the test
// binaries. Nothing here calls into the solvers it is used to check.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "ils/core.hpp"
#include "ils/model.hpp"

namespace ils::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline double max_correlation(const Matrix& h) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        for (Eigen::Index j = i + 1; j < h.cols(); ++j)
            worst = std::max(worst, std::fabs(h(i, j)) / std::sqrt(h(i, i) * h(j, j)));
    return worst;
}

/// SPD matrix whose largest |correlation| does not exceed `max_corr`.
/// `floor` sets how close to singular the correlation structure may get:
/// smaller values give stronger correlations.
inline Matrix random_spd(Rng& rng, int q, double max_corr = 0.999, double floor = 1e-3) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        const int rank = uniform_int(rng, 1, q);
        Matrix w(q, rank);
        for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = normal(rng);
        const double eps = std::exp(uniform(rng, std::log(floor), 0.0));
        Matrix c = w * w.transpose() + eps * Matrix::Identity(q, q);
        const Vector s = c.diagonal().cwiseSqrt().cwiseInverse();
        c = s.asDiagonal() * c * s.asDiagonal();
        if (max_correlation(c) > max_corr) continue;
        Vector scale(q);
        for (int i = 0; i < q; ++i) scale[i] = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
        return symmetrize(scale.asDiagonal() * c * scale.asDiagonal());
    }
}

inline Vector random_vector(Rng& rng, int q, double lo, double hi) {
    Vector v(q);
    for (int i = 0; i < q; ++i) v[i] = uniform(rng, lo, hi);
    return v;
}

inline IntegerLsProblem random_problem(Rng& rng, int q, double max_corr = 0.95, double floor = 1e-2) {
    return {random_spd(rng, q, max_corr, floor), random_vector(rng, q, -5.0, 5.0), 0.0};
}

/// Determinant through partial-pivoting LU in long double.
inline long double determinant(const Matrix& m) {
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    LMatrix a = m.cast<long double>();
    const Eigen::Index n = a.rows();
    long double det = 1.0L;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index p = k;
        for (Eigen::Index i = k + 1; i < n; ++i)
            if (std::fabs(a(i, k)) > std::fabs(a(p, k))) p = i;
        if (a(p, k) == 0.0L) return 0.0L;
        if (p != k) {
            a.row(p).swap(a.row(k));
            det = -det;
        }
        det *= a(k, k);
        for (Eigen::Index i = k + 1; i < n; ++i) {
            const long double f = a(i, k) / a(k, k);
            a.row(i).tail(n - k) -= f * a.row(k).tail(n - k);
        }
    }
    return det;
}

/// Integer determinant by cofactor expansion (small matrices only).
inline long double cofactor_determinant(const IntMatrix& g) {
    const Eigen::Index n = g.rows();
    if (n == 1) return static_cast<long double>(g(0, 0));
    long double det = 0.0L;
    for (Eigen::Index c = 0; c < n; ++c) {
        IntMatrix minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r)
            for (Eigen::Index k = 0, mk = 0; k < n; ++k)
                if (k != c) minor(r - 1, mk++) = g(r, k);
        const long double sign = (c % 2 == 0) ? 1.0L : -1.0L;
        det += sign * static_cast<long double>(g(0, c)) * cofactor_determinant(minor);
    }
    return det;
}

struct BruteForceResult {
    IntVector best;
    double objective = std::numeric_limits<double>::infinity();
    std::uint64_t visited = 0;
    int ties = 0;
};

/// Recursive nested loops over [lower, upper], evaluating the quadratic form
/// from scratch at every point. Strictly smaller objective wins, so the first
/// (lexicographically smallest) point among exact ties is kept.
inline BruteForceResult brute_force(const Matrix& h, const Vector& center, const IntVector& lower,
                                    const IntVector& upper) {
    BruteForceResult out;
    const Eigen::Index q = center.size();
    IntVector z(q);
    std::function<void(Eigen::Index)> loop = [&](Eigen::Index depth) {
        if (depth == q) {
            const Vector d = z.cast<double>() - center;
            const double value = d.dot(h * d);
            ++out.visited;
            if (value < out.objective) {
                out.objective = value;
                out.best = z;
            }
            return;
        }
        for (std::int64_t v = lower[depth]; v <= upper[depth]; ++v) {
            z[depth] = v;
            loop(depth + 1);
        }
    };
    loop(0);
    return out;
}

/// Exhaustive minimum of a function of n bits.
template <typename F>
std::pair<double, std::vector<int>> brute_force_bits(int n, F&& value_of) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_bits;
    std::vector<int> bits(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (int k = 0; k < n; ++k) bits[k] = static_cast<int>((mask >> k) & 1U);
        const double v = value_of(bits);
        if (v < best) {
            best = v;
            best_bits = bits;
        }
    }
    return {best, best_bits};
}

inline double relative_gap(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

}  // namespace ils::testing
