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

// Exhaustive minimization of (z - z_float)' H (z - z_float) over a box.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ils/box.hpp"
#include "ils/core.hpp"
#include "ils/decorrelate.hpp"
#include "ils/model.hpp"

namespace ils {

struct Candidate {
    IntVector z;
    double objective = 0.0;
};

struct OracleResult {
    IntVector best_z;
    double best_objective = 0.0;
    std::vector<Candidate> ranking;  // ascending objective, then lexicographic z
    bool ties = false;
    std::uint64_t candidates = 0;
};

inline constexpr std::uint64_t kOracleMaxCandidates = 10'000'000;

inline bool lexicographically_less(const IntVector& a, const IntVector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

namespace detail {

inline bool candidate_less(const Candidate& a, const Candidate& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return lexicographically_less(a.z, b.z);
}

// Odometer over the box in "counter" coordinates c. The evaluated point is
// z = directions * c, so the plain oracle uses the identity and the mapped
// oracle uses Gt'. The objective is tracked incrementally and recomputed
// exactly whenever the point could enter the ranking.
inline OracleResult enumerate_points(const IntegerLsProblem& problem, const IntMatrix& directions, const Box& box,
                                     std::size_t top_k) {
    problem.validate();
    box.validate();
    const Eigen::Index q = problem.dimension();
    require(box.dimension() == q && directions.rows() == q && directions.cols() == q, ErrorKind::DimensionMismatch,
            "box dimension does not match the problem");
    require(top_k >= 1, ErrorKind::InvalidArgument, "top_k must be at least 1");
    const std::uint64_t total = box.count();
    if (total > kOracleMaxCandidates) throw Error(ErrorKind::BoxTooLarge, "box exceeds the enumeration guard");

    const Matrix U = directions.cast<double>();
    const Matrix HU = problem.H * U;
    const Vector curvature = (U.transpose() * HU).diagonal();
    const std::size_t keep = std::max<std::size_t>(top_k, 2);

    IntVector counter = box.lower;
    auto point = [&](const IntVector& c) {
        IntVector z = IntVector::Zero(q);
        for (Eigen::Index j = 0; j < q; ++j)
            for (Eigen::Index i = 0; i < q; ++i)
                z[i] = checked_add(z[i], checked_mul(directions(i, j), c[j]));
        return z;
    };

    IntVector z = point(counter);
    Vector gradient = problem.H * (to_real(z) - problem.z_float);  // H (z - z_float)
    double value = objective_int(problem, z);

    std::vector<Candidate> ranking;
    ranking.reserve(keep + 1);
    auto resync = [&]() {
        z = point(counter);
        const Vector d = to_real(z) - problem.z_float;
        gradient = problem.H * d;
        value = d.dot(gradient);
    };

    OracleResult out;
    for (std::uint64_t visited = 0;; ++visited) {
        const bool full = ranking.size() >= keep;
        const double threshold = full ? ranking.back().objective : 0.0;
        if (!full || value <= threshold + 1e-6 * (1.0 + std::fabs(threshold))) {
            Candidate c{point(counter), 0.0};
            c.objective = objective_int(problem, c.z);
            if (!full || candidate_less(c, ranking.back())) {
                auto at = std::upper_bound(ranking.begin(), ranking.end(), c, candidate_less);
                ranking.insert(at, std::move(c));
                if (ranking.size() > keep) ranking.pop_back();
            }
        }
        out.candidates = visited + 1;

        // Advance; the last coordinate moves fastest.
        Eigen::Index k = q - 1;
        while (k >= 0 && counter[k] == box.upper[k]) --k;
        if (k < 0) break;
        bool carried = false;
        for (Eigen::Index r = k + 1; r < q; ++r) {
            counter[r] = box.lower[r];
            carried = true;
        }
        counter[k] += 1;
        if (carried) {
            resync();
        } else {
            // Step of +1 along direction k.
            value += 2.0 * U.col(k).dot(gradient) + curvature[k];
            gradient += HU.col(k);
        }
    }

    out.ties = ranking.size() >= 2 &&
               ranking[1].objective - ranking[0].objective < 1e-12 * std::max(1.0, std::fabs(ranking[0].objective));
    if (ranking.size() > top_k) ranking.resize(top_k);
    out.best_z = ranking.front().z;
    out.best_objective = ranking.front().objective;
    out.ranking = std::move(ranking);
    return out;
}

}  // namespace detail

/// Every lattice point of `box`, in the problem's own coordinates.
inline OracleResult enumerate(const IntegerLsProblem& problem, const Box& box, std::size_t top_k = 5) {
    const Eigen::Index q = problem.dimension();
    return detail::enumerate_points(problem, IntMatrix::Identity(q, q), box, top_k);
}

/// Every z = Gt' z1 with z1 in `transformed_box`, scored on the original
/// problem. Results are reported in original coordinates.
inline OracleResult enumerate_mapped(const IntegerLsProblem& problem, const UnimodularMap& map,
                                     const Box& transformed_box, std::size_t top_k = 5) {
    return detail::enumerate_points(problem, map.gt.transpose(), transformed_box, top_k);
}

}  // namespace ils
