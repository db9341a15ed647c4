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

// Exact route for box-bounded integer least squares: binary expansion of the
// decorrelated integers, expansion into a 0-1 quadratic, linearization of the
// bit products into a 0-1 linear program, and a branch-and-bound solver.

#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ils/box.hpp"
#include "ils/core.hpp"
#include "ils/decorrelate.hpp"
#include "ils/model.hpp"
#include "ils/pivot_solver.hpp"

namespace ils {

/// Weighted sum of bits bounded from above: sum_k weight_k * x_k <= limit.
/// Used both over bit indices and over ILP variable indices.
struct CapConstraint {
    std::vector<std::pair<Eigen::Index, std::int64_t>> terms;
    std::int64_t limit = 0;

    bool satisfied(std::span<const int> x, Eigen::Index index_base = 0) const {
        std::int64_t load = 0;
        for (const auto& [index, weight] : terms) load += weight * x[index - index_base];
        return load <= limit;
    }
};

/// z1 = lower + A1 * b with bits_per_coordinate[i] bits for coordinate i.
struct BinaryEncoding {
    Box box;
    std::vector<int> bits_per_coordinate;
    std::vector<Eigen::Index> first_bit;
    IntMatrix a1;
    std::vector<CapConstraint> caps;  // over bit indices, only for overshooting ranges

    Eigen::Index total_bits() const { return a1.cols(); }
};

inline BinaryEncoding encode(const Box& box) {
    box.validate();
    BinaryEncoding enc;
    enc.box = box;
    const Eigen::Index q = box.dimension();
    enc.bits_per_coordinate.resize(q);
    enc.first_bit.resize(q);
    Eigen::Index total = 0;
    for (Eigen::Index i = 0; i < q; ++i) {
        const auto width = static_cast<std::uint64_t>(box.width(i));
        // floor(log2(width)) + 1, zero for a fixed coordinate
        const int r = static_cast<int>(std::bit_width(width));
        detail::require(r <= 62, ErrorKind::BoxTooLarge, "box width does not fit the bit encoding");
        enc.bits_per_coordinate[i] = r;
        enc.first_bit[i] = total;
        total += r;
    }
    enc.a1 = IntMatrix::Zero(q, total);
    for (Eigen::Index i = 0; i < q; ++i) {
        const int r = enc.bits_per_coordinate[i];
        CapConstraint cap;
        for (int j = 0; j < r; ++j) {
            enc.a1(i, enc.first_bit[i] + j) = std::int64_t{1} << j;
            cap.terms.emplace_back(enc.first_bit[i] + j, std::int64_t{1} << j);
        }
        cap.limit = box.width(i);
        const std::int64_t reach = r == 0 ? 0 : (std::int64_t{1} << r) - 1;
        if (reach > cap.limit) enc.caps.push_back(std::move(cap));
    }
    return enc;
}

inline IntVector decode(const BinaryEncoding& enc, std::span<const int> bits) {
    detail::require(static_cast<Eigen::Index>(bits.size()) == enc.total_bits(), ErrorKind::DimensionMismatch,
                    "bit vector length does not match the encoding");
    for (int b : bits) detail::require(b == 0 || b == 1, ErrorKind::BitOutOfRange, "bits must be 0 or 1");
    for (const auto& cap : enc.caps)
        detail::require(cap.satisfied(bits), ErrorKind::CapViolated, "decoded value exceeds the box");
    IntVector z = enc.box.lower;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        for (int j = 0; j < enc.bits_per_coordinate[i]; ++j)
            if (bits[enc.first_bit[i] + j]) z[i] += std::int64_t{1} << j;
    return z;
}

/// Bits of a point inside the box.
inline std::vector<int> encode_point(const BinaryEncoding& enc, const IntVector& z1) {
    detail::require(enc.box.contains(z1), ErrorKind::InvalidArgument, "point lies outside the box");
    std::vector<int> bits(enc.total_bits(), 0);
    for (Eigen::Index i = 0; i < z1.size(); ++i) {
        const auto offset = static_cast<std::uint64_t>(z1[i] - enc.box.lower[i]);
        for (int j = 0; j < enc.bits_per_coordinate[i]; ++j) bits[enc.first_bit[i] + j] = (offset >> j) & 1U;
    }
    return bits;
}

/// constant + sum_k linear_k b_k + sum_{k<l} quadratic(k, l) b_k b_l,
/// already folded with b_k^2 = b_k.
struct Qubo {
    double constant = 0.0;
    Vector linear;
    Matrix quadratic;  // strictly upper triangular
    std::vector<CapConstraint> caps;

    Eigen::Index num_bits() const { return linear.size(); }

    double evaluate(std::span<const int> bits) const {
        double value = constant;
        const Eigen::Index n = num_bits();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!bits[k]) continue;
            value += linear[k];
            for (Eigen::Index l = k + 1; l < n; ++l)
                if (bits[l]) value += quadratic(k, l);
        }
        return value;
    }
};

/// Expands (A1 b + m0 - z1_float)' H1 (A1 b + m0 - z1_float).
inline Qubo build_qubo(const DecorrelatedProblem& dp, const BinaryEncoding& enc) {
    const Eigen::Index q = dp.H1.rows();
    detail::require(enc.box.dimension() == q && dp.z1_float.size() == q, ErrorKind::DimensionMismatch,
                    "encoding dimension does not match the problem");
    const Matrix A1 = enc.a1.cast<double>();
    const Vector offset = to_real(enc.box.lower) - dp.z1_float;
    const Matrix M = A1.transpose() * dp.H1 * A1;
    const Vector g = A1.transpose() * (dp.H1 * offset);

    Qubo qubo;
    qubo.constant = offset.dot(dp.H1 * offset);
    const Eigen::Index n = enc.total_bits();
    qubo.linear = 2.0 * g + M.diagonal();
    qubo.quadratic = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = k + 1; l < n; ++l) qubo.quadratic(k, l) = M(k, l) + M(l, k);
    qubo.caps = enc.caps;
    return qubo;
}

/// v_k = b_i b_j for link (k, ki, kj), enforced by
/// v_k >= v_ki + v_kj - 1, v_k <= v_ki, v_k <= v_kj. Indices are 1-based.
struct LinkConstraint {
    Eigen::Index k = 0;
    Eigen::Index ki = 0;
    Eigen::Index kj = 0;
};

/// min const_term + c'v over binary v. Variable v_k (1-based) lives at
/// c[k - 1]; v_k for k = i(i-1)/2 + j, i >= j, stands for b_i b_j and the
/// diagonal v_{i(i+1)/2} is bit b_i itself.
struct Ilp01 {
    Vector c;
    double const_term = 0.0;
    std::vector<LinkConstraint> links;
    std::vector<CapConstraint> caps;  // over 1-based diagonal v indices
    Eigen::Index t_b = 0;
    Eigen::Index t_v = 0;

    static constexpr Eigen::Index packed_index(Eigen::Index i, Eigen::Index j) {
        return i >= j ? (i - 1) * i / 2 + j : (j - 1) * j / 2 + i;
    }
    static constexpr Eigen::Index diagonal_index(Eigen::Index i) { return i * (i + 1) / 2; }

    double objective(std::span<const int> v) const {
        double value = const_term;
        for (Eigen::Index k = 0; k < t_v; ++k)
            if (v[k]) value += c[k];
        return value;
    }

    bool feasible(std::span<const int> v) const {
        if (static_cast<Eigen::Index>(v.size()) != t_v) return false;
        for (int x : v)
            if (x != 0 && x != 1) return false;
        for (const auto& link : links) {
            const int vk = v[link.k - 1], vi = v[link.ki - 1], vj = v[link.kj - 1];
            if (vk < vi + vj - 1 || vk > vi || vk > vj) return false;
        }
        for (const auto& cap : caps)
            if (!cap.satisfied(v, 1)) return false;
        return true;
    }

    /// Full v from bits, every product set to b_i b_j.
    std::vector<int> complete(std::span<const int> bits) const {
        std::vector<int> v(t_v, 0);
        for (Eigen::Index i = 1; i <= t_b; ++i)
            for (Eigen::Index j = 1; j <= i; ++j) v[packed_index(i, j) - 1] = bits[i - 1] & bits[j - 1];
        return v;
    }

    std::vector<int> bits_of(std::span<const int> v) const {
        std::vector<int> bits(t_b);
        for (Eigen::Index i = 1; i <= t_b; ++i) bits[i - 1] = v[diagonal_index(i) - 1];
        return bits;
    }

    /// Products that carry a cost and therefore a link constraint.
    Eigen::Index active_products() const { return static_cast<Eigen::Index>(links.size()); }
};

/// Products with a zero coefficient get neither cost nor constraints.
inline Ilp01 linearize(const Qubo& qubo) {
    Ilp01 ilp;
    const Eigen::Index n = qubo.num_bits();
    ilp.t_b = n;
    ilp.t_v = n * (n + 1) / 2;
    ilp.const_term = qubo.constant;
    ilp.c = Vector::Zero(ilp.t_v);
    for (Eigen::Index i = 1; i <= n; ++i) {
        ilp.c[Ilp01::diagonal_index(i) - 1] = qubo.linear[i - 1];
        for (Eigen::Index j = 1; j < i; ++j) {
            const double coeff = qubo.quadratic(j - 1, i - 1);
            if (coeff == 0.0) continue;
            const Eigen::Index k = Ilp01::packed_index(i, j);
            ilp.c[k - 1] = coeff;
            ilp.links.push_back({k, Ilp01::diagonal_index(i), Ilp01::diagonal_index(j)});
        }
    }
    for (const auto& cap : qubo.caps) {
        CapConstraint row;
        row.limit = cap.limit;
        for (const auto& [bit, weight] : cap.terms) row.terms.emplace_back(Ilp01::diagonal_index(bit + 1), weight);
        ilp.caps.push_back(std::move(row));
    }
    return ilp;
}

struct BranchBoundResult {
    std::vector<int> v;
    std::vector<int> bits;
    double objective = 0.0;
    std::uint64_t nodes = 0;
    std::size_t incumbent_updates = 0;
    bool warm_start_used = false;
};

inline constexpr Eigen::Index kMaxBranchBits = 30;

namespace detail {

// Depth-first search over the bit (diagonal) variables. Products are never
// branched on: once both factors are fixed, v_k = v_ki * v_kj is forced by
// the link constraints.
class BranchAndBound {
public:
    explicit BranchAndBound(const Ilp01& ilp) : ilp_(ilp), n_(ilp.t_b) {
        diag_.resize(n_);
        neighbors_.resize(n_);
        for (Eigen::Index i = 0; i < n_; ++i) diag_[i] = ilp.c[Ilp01::diagonal_index(i + 1) - 1];
        // Map diagonal v index back to bit index.
        std::vector<Eigen::Index> bit_of(ilp.t_v + 1, -1);
        for (Eigen::Index i = 0; i < n_; ++i) bit_of[Ilp01::diagonal_index(i + 1)] = i;
        for (const auto& link : ilp.links) {
            const Eigen::Index a = bit_of[link.ki], b = bit_of[link.kj];
            const double cost = ilp.c[link.k - 1];
            neighbors_[a].push_back({b, cost});
            neighbors_[b].push_back({a, cost});
        }
        cap_of_.resize(n_);
        cap_load_.assign(ilp.caps.size(), 0);
        for (std::size_t c = 0; c < ilp.caps.size(); ++c)
            for (const auto& [index, weight] : ilp.caps[c].terms) cap_of_[bit_of[index]].push_back({c, weight});

        // Branch on influential bits first.
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), Eigen::Index{0});
        std::vector<double> influence(n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            influence[i] = std::fabs(diag_[i]);
            for (const auto& nb : neighbors_[i]) influence[i] += std::fabs(nb.cost);
        }
        std::stable_sort(order_.begin(), order_.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return influence[a] > influence[b]; });
    }

    BranchBoundResult run(const std::vector<int>* warm_bits) {
        BranchBoundResult out;
        state_.assign(n_, kFree);
        bound_ = ilp_.const_term;
        for (Eigen::Index i = 0; i < n_; ++i) {
            bound_ += std::min(0.0, diag_[i]);
            for (const auto& nb : neighbors_[i])
                if (nb.other > i) bound_ += std::min(0.0, nb.cost);
        }
        if (warm_bits && static_cast<Eigen::Index>(warm_bits->size()) == n_) {
            const std::vector<int> v = ilp_.complete(*warm_bits);
            if (ilp_.feasible(v)) {
                best_bits_ = *warm_bits;
                best_value_ = ilp_.objective(v);
                out.warm_start_used = true;
            }
        }
        search(0);
        if (best_bits_.size() != static_cast<std::size_t>(n_))
            throw Error(ErrorKind::Infeasible, "no feasible assignment");
        out.bits = best_bits_;
        out.v = ilp_.complete(out.bits);
        out.objective = ilp_.objective(out.v);
        out.nodes = nodes_;
        out.incumbent_updates = updates_;
        return out;
    }

private:
    static constexpr int kFree = -1;

    struct Neighbor {
        Eigen::Index other;
        double cost;
    };

    static double contribution(int a, int b, double cost) {
        if (a == 0 || b == 0) return 0.0;
        if (a == 1 && b == 1) return cost;
        return std::min(0.0, cost);
    }

    // Change of the bound when bit i goes from free to `value`.
    double delta(Eigen::Index i, int value) const {
        double d = (value ? diag_[i] : 0.0) - std::min(0.0, diag_[i]);
        for (const auto& nb : neighbors_[i])
            d += contribution(value, state_[nb.other], nb.cost) - contribution(kFree, state_[nb.other], nb.cost);
        return d;
    }

    bool cap_allows(Eigen::Index i) const {
        for (const auto& [c, weight] : cap_of_[i])
            if (cap_load_[c] + weight > ilp_.caps[c].limit) return false;
        return true;
    }

    void search(Eigen::Index depth) {
        ++nodes_;
        const double slack = 1e-12 * (1.0 + std::fabs(best_value_));
        if (!best_bits_.empty() && bound_ >= best_value_ + slack) return;
        if (depth == n_) {
            std::vector<int> bits(n_);
            for (Eigen::Index i = 0; i < n_; ++i) bits[i] = state_[i];
            const double value = ilp_.objective(ilp_.complete(bits));
            if (best_bits_.empty() || value < best_value_) {
                best_bits_ = std::move(bits);
                best_value_ = value;
                ++updates_;
            }
            return;
        }
        const Eigen::Index i = order_[depth];
        const double d0 = delta(i, 0);
        const bool one_ok = cap_allows(i);
        const double d1 = one_ok ? delta(i, 1) : 0.0;
        const int first = (one_ok && d1 < d0) ? 1 : 0;
        for (int value : {first, 1 - first}) {
            if (value == 1 && !one_ok) continue;
            const double d = value ? d1 : d0;
            state_[i] = value;
            bound_ += d;
            if (value)
                for (const auto& [c, weight] : cap_of_[i]) cap_load_[c] += weight;
            search(depth + 1);
            if (value)
                for (const auto& [c, weight] : cap_of_[i]) cap_load_[c] -= weight;
            bound_ -= d;
            state_[i] = kFree;
        }
    }

    const Ilp01& ilp_;
    Eigen::Index n_;
    std::vector<double> diag_;
    std::vector<std::vector<Neighbor>> neighbors_;
    std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> cap_of_;
    std::vector<std::int64_t> cap_load_;
    std::vector<Eigen::Index> order_;
    std::vector<int> state_;
    double bound_ = 0.0;
    std::vector<int> best_bits_;
    double best_value_ = std::numeric_limits<double>::infinity();
    std::uint64_t nodes_ = 0;
    std::size_t updates_ = 0;
};

}  // namespace detail

/// Global optimum of the 0-1 program. `warm_bits` seeds the incumbent when
/// it is feasible.
inline BranchBoundResult solve_branch_bound(const Ilp01& ilp, const std::vector<int>* warm_bits = nullptr) {
    if (ilp.t_b > kMaxBranchBits) throw Error(ErrorKind::BoxTooLarge, "too many binary variables for branch and bound");
    detail::BranchAndBound bb(ilp);
    return bb.run(warm_bits);
}

struct IlpOptions {
    std::optional<Box> box;  // decorrelated coordinates
    double kappa = 3.0;
    double sigma2 = 1.0;
    bool warm_start = true;
};

struct IlpStats {
    std::uint64_t nodes = 0;
    Eigen::Index bits = 0;
    Eigen::Index products = 0;
    std::size_t incumbent_updates = 0;
};

struct IlpResult {
    IntVector z_int;
    double objective_int = 0.0;
    IlpStats stats;
    Box box;
    DecorrelatedProblem decorrelated;
};

/// Optimum of the integer problem over all z whose decorrelated image lies in
/// the box.
inline IlpResult solve_ilp(const IntegerLsProblem& problem, const IlpOptions& options = {}) {
    problem.validate();
    IlpResult out;
    out.decorrelated = decorrelate(problem);
    const DecorrelatedProblem& dp = out.decorrelated;
    out.box = options.box ? *options.box : default_box(dp, options.kappa, options.sigma2);
    detail::require(out.box.dimension() == problem.dimension(), ErrorKind::DimensionMismatch,
                    "box dimension does not match the problem");

    const BinaryEncoding enc = encode(out.box);
    if (enc.total_bits() > kMaxBranchBits) throw Error(ErrorKind::BoxTooLarge, "box needs more than 30 bits");
    const Ilp01 ilp = linearize(build_qubo(dp, enc));

    std::vector<int> warm;
    if (options.warm_start) {
        const IntegerSolution seed = solve_pivot(dp.as_problem(), false);
        warm = encode_point(enc, out.box.clamp(seed.z_int));
    }
    const BranchBoundResult bb = solve_branch_bound(ilp, options.warm_start ? &warm : nullptr);

    out.z_int = dp.map.map_back(decode(enc, bb.bits));
    out.objective_int = objective_int(problem, out.z_int);
    out.stats = {bb.nodes, ilp.t_b, ilp.active_products(), bb.incumbent_updates};
    return out;
}

}  // namespace ils
