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

#include "catch_amalgamated.hpp"

#include "ils/pivot_solver.hpp"
#include "support.hpp"

using namespace ils;
using Catch::Approx;

namespace {

// Replays the elimination in the recorded order and checks that each pivot
// was the smallest remaining updated diagonal.
bool pivots_are_minimal(const Matrix& h1, const PivotedFactor& f) {
    const Eigen::Index n = h1.rows();
    Matrix work = h1;
    std::vector<bool> done(n, false);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index p = f.perm[k];
        for (Eigen::Index i = 0; i < n; ++i)
            if (!done[i] && work(i, i) < work(p, p) - 1e-12 * std::fabs(work(p, p))) return false;
        if (std::fabs(work(p, p) - f.pivot_values[k]) > 1e-10 * std::max(1.0, std::fabs(work(p, p)))) return false;
        const Vector col = work.col(p) / std::sqrt(work(p, p));
        work -= col * col.transpose();
        done[p] = true;
    }
    return true;
}

// Conditional rounding written from the sum-of-squares form: minimize each
// |sum_{j>=i} l_ji (z_j - zf_j)| over integer z_i, last coordinate first.
IntVector sequential_reference(const Matrix& L, const Vector& zf) {
    const Eigen::Index n = zf.size();
    IntVector z(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double tail = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) tail += L(j, i) * (static_cast<double>(z[j]) - zf[j]);
        // l_ii (z_i - zf_i) + tail = 0 at z_i = zf_i - tail / l_ii.
        const double target = zf[i] - tail / L(i, i);
        const double lo = std::floor(target), hi = std::ceil(target);
        const double err_lo = std::fabs(L(i, i) * (lo - zf[i]) + tail);
        const double err_hi = std::fabs(L(i, i) * (hi - zf[i]) + tail);
        double pick = err_lo < err_hi ? lo : hi;
        if (err_lo == err_hi) pick = std::round(target);
        z[i] = static_cast<std::int64_t>(pick);
    }
    return z;
}

}  // namespace

TEST_CASE("factorize_min_pivot: examples", "[pivot]") {
    const Matrix d = Vector{{4.0, 1.0}}.asDiagonal();
    const PivotedFactor f = factorize_min_pivot(d);
    CHECK(f.perm == std::vector<Eigen::Index>{1, 0});
    CHECK(f.L.isApprox(Matrix(Vector{{1.0, 2.0}}.asDiagonal())));
    CHECK(f.reconstruct().isApprox(d));

    const PivotedFactor id = factorize_min_pivot(Matrix::Identity(3, 3));
    CHECK(id.perm == std::vector<Eigen::Index>{0, 1, 2});
    CHECK(id.L == Matrix::Identity(3, 3));

    testing::Rng rng(6);
    const Matrix h = testing::random_spd(rng, 6, 0.99);
    const PivotedFactor g = factorize_min_pivot(h);
    CHECK(max_abs(g.reconstruct() - h) <= 1e-9 * max_abs(h));
    CHECK(pivots_are_minimal(h, g));
}

TEST_CASE("factorize_min_pivot: properties", "[pivot][property]") {
    testing::Rng rng(99);
    for (int t = 0; t < 1000; ++t) {
        const int q = testing::uniform_int(rng, 1, 9);
        const Matrix h = testing::random_spd(rng, q, 0.999, 1e-3);
        const PivotedFactor f = factorize_min_pivot(h);
        CHECK(max_abs(f.reconstruct() - h) <= 1e-9 * max_abs(h));
        CHECK((f.L.diagonal().array() > 0.0).all());
        CHECK(f.L.isLowerTriangular());
        CHECK(pivots_are_minimal(h, f));
    }
}

TEST_CASE("factorize_min_pivot rejects singular input", "[pivot]") {
    try {
        factorize_min_pivot(Matrix{{1.0, 1.0}, {1.0, 1.0}});
        FAIL("expected NotSpd");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotSpd);
    }
}

TEST_CASE("solve_sequential", "[pivot]") {
    PivotedFactor id = factorize_min_pivot(Matrix::Identity(2, 2));
    CHECK(solve_sequential(id, Vector{{0.3, -1.7}}) == IntVector{{0, -2}});

    PivotedFactor scalar = factorize_min_pivot(Matrix{{4.0}});
    CHECK(scalar.L(0, 0) == 2.0);
    CHECK(solve_sequential(scalar, Vector{{0.49}}) == IntVector{{0}});
    CHECK(solve_sequential(scalar, Vector{{0.51}}) == IntVector{{1}});

    testing::Rng rng(31);
    for (int t = 0; t < 300; ++t) {
        const int q = testing::uniform_int(rng, 2, 7);
        const PivotedFactor f = factorize_min_pivot(testing::random_spd(rng, q, 0.95));
        const Vector zf = testing::random_vector(rng, q, -8, 8);
        std::vector<std::size_t> counts(q, 0);
        const IntVector z = solve_sequential(f, zf, counts);
        CHECK(z == sequential_reference(f.L, zf));
        for (auto c : counts) CHECK(c == 1);
    }
}

TEST_CASE("the best-determined ambiguity is fixed first", "[pivot]") {
    // The backward pass fixes the last eliminated coordinate first; its weight
    // is the full conditional precision of that coordinate.
    testing::Rng rng(12);
    for (int t = 0; t < 100; ++t) {
        const Matrix h = testing::random_spd(rng, 5, 0.9);
        const PivotedFactor f = factorize_min_pivot(h);
        // l_qq^2 is the precision of the last coordinate, 1 / (H^-1)_pp.
        const Eigen::Index last = f.perm[4];
        const double precision = 1.0 / h.inverse()(last, last);
        CHECK(f.L(4, 4) * f.L(4, 4) == Approx(precision).epsilon(1e-9));
    }
}

TEST_CASE("solve_round", "[pivot]") {
    CHECK(solve_round({Matrix::Identity(2, 2), Vector{{0.3, -1.7}}, 0.0}).z_int == IntVector{{0, -2}});
    CHECK(solve_round({Matrix::Identity(3, 3), Vector{{4.0, -2.0, 0.0}}, 0.0}).z_int == IntVector{{4, -2, 0}});
    CHECK(solve_round({Matrix::Identity(2, 2), Vector{{0.5, -0.5}}, 0.0}).z_int == IntVector{{1, -1}});
}

TEST_CASE("solve_pivot: examples", "[pivot]") {
    SECTION("diagonal H is plain rounding") {
        const IntegerLsProblem p{Matrix(Vector{{2.0, 0.1, 9.0}}.asDiagonal()), Vector{{0.49, 3.51, -7.2}}, 0.0};
        CHECK(solve_pivot(p).z_int == solve_round(p).z_int);
        CHECK(solve_pivot(p, false).z_int == solve_round(p).z_int);
    }
    SECTION("mild correlation finds the box optimum") {
        const IntegerLsProblem p{Matrix{{4.0, 1.2}, {1.2, 1.0}}, Vector{{2.2, 0.7}}, 0.0};
        const IntegerSolution s = solve_pivot(p);
        const auto brute = testing::brute_force(p.H, p.z_float, IntVector{{-2, -4}}, IntVector{{6, 4}});
        CHECK(s.z_int == brute.best);
        CHECK(s.objective_int == Approx(brute.objective).epsilon(1e-12));
    }
    SECTION("integral float solution is returned as is") {
        const auto inst = generate_synthetic(2, 5, 15, 0.0, 0.7, 3);
        CHECK(solve_pivot(reduce(inst.model)).z_int == inst.true_z);
    }
}

TEST_CASE("solve_pivot: ensemble against rounding", "[pivot][property]") {
    testing::Rng rng(500);
    int at_least_as_good = 0;
    const int n = 500;
    for (int t = 0; t < n; ++t) {
        const IntegerLsProblem p = testing::random_problem(rng, 3, 0.95);
        const IntegerSolution s = solve_pivot(p);
        at_least_as_good += s.objective_int <= solve_round(p).objective_int + 1e-12;
    }
    CHECK(at_least_as_good >= 0.85 * n);
}

TEST_CASE("solve_pivot: scale invariance and integrality", "[pivot][property]") {
    testing::Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        const int q = testing::uniform_int(rng, 2, 6);
        const IntegerLsProblem p = testing::random_problem(rng, q, 0.95);
        const IntVector base = solve_pivot(p).z_int;
        for (double c : {0.1, 10.0}) {
            const IntegerLsProblem scaled{c * p.H, p.z_float, 0.0};
            CHECK(solve_pivot(scaled).z_int == base);
        }
        PivotTrace trace;
        solve_pivot(p, true, &trace);
        for (auto count : trace.round_counts) CHECK(count == 1);
    }
}
