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

// Mixed real/integer linear model  y = A*beta + B*z + e,  D[y] = P^-1 * sigma2,
// and its reduction to the integer least-squares form (z - zf)' H (z - zf) + c0.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include "ils/core.hpp"

namespace ils {

struct MixedModel {
    Vector y;
    Matrix A;  // m x p, may have zero columns
    Matrix B;  // m x q
    Matrix P;  // m x m weight matrix
    double sigma2 = 1.0;

    Eigen::Index num_observations() const { return y.size(); }
    Eigen::Index num_real() const { return A.cols(); }
    Eigen::Index num_integer() const { return B.cols(); }

    /// Shape and weight checks. Rank is checked by reduce().
    void validate() const {
        const auto m = y.size();
        detail::require(A.rows() == m || (A.cols() == 0), ErrorKind::DimensionMismatch, "A must have one row per observation");
        detail::require(B.rows() == m, ErrorKind::DimensionMismatch, "B must have one row per observation");
        detail::require(P.rows() == m && P.cols() == m, ErrorKind::DimensionMismatch, "P must be m x m");
        detail::require(B.cols() >= 1, ErrorKind::DimensionMismatch, "at least one integer parameter is required");
        detail::require(m >= A.cols() + B.cols(), ErrorKind::RankDeficient, "fewer observations than unknowns");
        detail::require(sigma2 > 0.0 && std::isfinite(sigma2), ErrorKind::InvalidArgument, "sigma2 must be positive");
        const double scale = std::max(1.0, max_abs(P));
        detail::require(max_abs(P - P.transpose()) <= 1e-12 * scale, ErrorKind::NotSpd, "P is not symmetric");
        checked_cholesky(symmetrize(P), ErrorKind::NotSpd, "P is not positive definite");
    }
};

/// min (z - z_float)' H (z - z_float) over integer z, plus the constant c0.
struct IntegerLsProblem {
    Matrix H;
    Vector z_float;
    double c0 = 0.0;

    Eigen::Index dimension() const { return z_float.size(); }

    void validate() const {
        detail::require(H.rows() == H.cols() && H.rows() == z_float.size(), ErrorKind::DimensionMismatch,
                        "H must be q x q with q = len(z_float)");
        detail::require(z_float.size() >= 1, ErrorKind::DimensionMismatch, "empty problem");
        detail::require(z_float.allFinite() && H.allFinite(), ErrorKind::InvalidArgument, "non-finite input");
    }
};

struct MixedSolution {
    IntVector z_int;
    Vector beta;
    double objective_full = 0.0;
    double objective_int = 0.0;
};

inline double objective_full(const MixedModel& model, const Vector& beta, const Vector& z) {
    detail::require(beta.size() == model.num_real() && z.size() == model.num_integer(),
                    ErrorKind::DimensionMismatch, "beta/z length does not match the model");
    Vector r = model.y - model.B * z;
    if (beta.size() > 0) r -= model.A * beta;
    return r.dot(model.P * r);
}

inline double objective_full(const MixedModel& model, const Vector& beta, const IntVector& z) {
    return objective_full(model, beta, to_real(z));
}

/// (z - z_float)' H (z - z_float). Real-valued z is accepted for probing.
inline double objective_int(const IntegerLsProblem& problem, const Vector& z) {
    detail::require(z.size() == problem.dimension(), ErrorKind::DimensionMismatch, "z length does not match the problem");
    const Vector d = z - problem.z_float;
    return d.dot(problem.H * d);
}

inline double objective_int(const IntegerLsProblem& problem, const IntVector& z) {
    return objective_int(problem, to_real(z));
}

namespace detail {

// Pieces shared by reduce() and recover_real(): Cholesky of A'PA and the
// projected quantities. p = 0 means nothing is eliminated.
struct RealElimination {
    Eigen::LLT<Matrix> normal;
    Matrix PA;  // P*A, m x p
    bool empty = true;

    explicit RealElimination(const MixedModel& model) {
        if (model.num_real() == 0) return;
        empty = false;
        PA = model.P * model.A;
        normal = checked_cholesky(symmetrize(model.A.transpose() * PA), ErrorKind::RankDeficient,
                                  "A'PA is singular");
    }
};

}  // namespace detail

/// Eliminates the real parameters: H = B'PQPB with Q = P^-1 - A(A'PA)^-1A',
/// z_float = H^-1 B'PQPy. No explicit inverse is formed.
inline IntegerLsProblem reduce(const MixedModel& model) {
    model.validate();
    const detail::RealElimination elim(model);
    const Matrix PB = model.P * model.B;
    Matrix H = model.B.transpose() * PB;
    // Cancellation against B'PB is what signals B leaning on the span of A.
    const double scale = H.diagonal().maxCoeff();
    Vector rhs = PB.transpose() * model.y;
    if (!elim.empty) {
        // W = L^-1 A'PB, so B'PA (A'PA)^-1 A'PB = W'W.
        const auto L = elim.normal.matrixL();
        const Matrix W = L.solve(model.A.transpose() * PB);
        const Vector w = L.solve(elim.PA.transpose() * model.y);
        H -= W.transpose() * W;
        rhs -= W.transpose() * w;
    }
    IntegerLsProblem out;
    out.H = symmetrize(H);
    const auto llt = checked_cholesky(out.H, ErrorKind::RankDeficient, "[A B] is rank deficient", 1e-12, scale);
    out.z_float = llt.solve(rhs);

    // c0 is whatever makes F = F2 + c0 hold; evaluate it at a nearby lattice point.
    const IntVector probe = round_nearest(out.z_float);
    Vector beta;
    if (elim.empty) {
        beta = Vector(0);
    } else {
        beta = elim.normal.solve(elim.PA.transpose() * (model.y - model.B * to_real(probe)));
    }
    out.c0 = objective_full(model, beta, probe) - objective_int(out, probe);
    return out;
}

/// Real parameters at fixed integers: solves A'PA beta = A'P(y - Bz).
inline Vector recover_real(const MixedModel& model, const IntVector& z_int) {
    detail::require(z_int.size() == model.num_integer(), ErrorKind::DimensionMismatch, "z length does not match B");
    if (model.num_real() == 0) return Vector(0);
    const detail::RealElimination elim(model);
    return elim.normal.solve(elim.PA.transpose() * (model.y - model.B * to_real(z_int)));
}

inline MixedSolution complete_solution(const MixedModel& model, const IntegerLsProblem& problem,
                                       const IntVector& z_int) {
    MixedSolution s;
    s.z_int = z_int;
    s.beta = recover_real(model, z_int);
    s.objective_full = objective_full(model, s.beta, z_int);
    s.objective_int = objective_int(problem, z_int);
    return s;
}

struct SyntheticInstance {
    MixedModel model;
    Vector true_beta;
    IntVector true_z;
};

/// Random full-rank model with known truth. correlation_strength in [0, 1)
/// blends a shared column into every column of B, which correlates the float
/// ambiguities. sigma2 is set to noise_sigma^2 (1 when noiseless).
inline SyntheticInstance generate_synthetic(int p, int q, int m, double noise_sigma, double correlation_strength,
                                            std::uint64_t seed) {
    detail::require(p >= 0 && q >= 1 && m >= p + q, ErrorKind::InvalidArgument, "need p >= 0, q >= 1, m >= p + q");
    detail::require(noise_sigma >= 0.0, ErrorKind::InvalidArgument, "noise_sigma must be >= 0");
    detail::require(correlation_strength >= 0.0 && correlation_strength < 1.0, ErrorKind::InvalidArgument,
                    "correlation_strength must lie in [0, 1)");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    std::uniform_int_distribution<int> ambiguity(-20, 20);

    constexpr int kMaxRetries = 100;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        SyntheticInstance inst;
        MixedModel& model = inst.model;
        model.A = Matrix(m, p);
        for (Eigen::Index k = 0; k < model.A.size(); ++k) model.A.data()[k] = normal(rng);

        Vector shared(m);
        for (int i = 0; i < m; ++i) shared[i] = normal(rng);
        model.B = Matrix(m, q);
        for (int j = 0; j < q; ++j)
            for (int i = 0; i < m; ++i)
                model.B(i, j) = (1.0 - correlation_strength) * normal(rng) + correlation_strength * shared[i];

        Vector w(m);
        for (int i = 0; i < m; ++i) w[i] = weight(rng);
        model.P = w.asDiagonal();
        model.sigma2 = noise_sigma > 0.0 ? noise_sigma * noise_sigma : 1.0;

        inst.true_beta = Vector(p);
        for (int i = 0; i < p; ++i) inst.true_beta[i] = 10.0 * normal(rng);
        inst.true_z = IntVector(q);
        for (int i = 0; i < q; ++i) inst.true_z[i] = ambiguity(rng);

        model.y = model.B * to_real(inst.true_z);
        if (p > 0) model.y += model.A * inst.true_beta;
        for (int i = 0; i < m; ++i) model.y[i] += noise_sigma * normal(rng) / std::sqrt(w[i]);

        Matrix joint(m, p + q);
        joint << model.A, model.B;
        const Matrix normal_matrix = joint.transpose() * model.P * joint;
        Eigen::LLT<Matrix> llt(normal_matrix);
        if (llt.info() != Eigen::Success) continue;
        const Vector d = Matrix(llt.matrixL()).diagonal();
        if (d.cwiseAbs2().minCoeff() <= 1e-10 * normal_matrix.diagonal().maxCoeff()) continue;
        return inst;
    }
    throw Error(ErrorKind::GenerationFailed, "could not draw a full-rank model");
}

}  // namespace ils
