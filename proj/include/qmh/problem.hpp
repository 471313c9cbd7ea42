#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmh/statevector.hpp"

namespace qmh {

/// Discrete optimization problem: P variables of Q qubits each plus a total,
/// deterministic cost function over variable-value vectors (each value in
/// [0, 2^Q)). Immutable after construction and freely shareable.
struct ProblemSpec {
    std::uint32_t variables = 1;           // P
    std::uint32_t qubits_per_variable = 1; // Q
    std::function<double(const std::vector<std::uint32_t>&)> cost;
    std::string label;

    ProblemSpec(std::uint32_t p, std::uint32_t q,
                std::function<double(const std::vector<std::uint32_t>&)> c,
                std::string name)
        : variables(p), qubits_per_variable(q), cost(std::move(c)),
          label(std::move(name)) {
        if (p < 1 || q < 1) {
            throw std::invalid_argument("ProblemSpec: need P >= 1 and Q >= 1");
        }
        if (!cost) {
            throw std::invalid_argument("ProblemSpec: cost function required");
        }
    }

    std::uint32_t state_qubits() const { return variables * qubits_per_variable; }
    std::uint64_t state_count() const { return 1ULL << state_qubits(); }
    std::uint32_t values_per_variable() const { return 1u << qubits_per_variable; }

    RegisterLayout layout(std::uint32_t acceptance_qubits = 0) const {
        return RegisterLayout{variables, qubits_per_variable, acceptance_qubits};
    }
};

/// Single-variable +-1 move; exactly 2P moves exist.
struct Move {
    std::uint32_t variable = 0;
    int direction = +1; // +1 or -1
};

inline Move inverse(Move m) { return {m.variable, -m.direction}; }

/// Canonical move order used by both the classical proposal draw and the
/// quantum move registers: index 2*v + b with b=0 -> +1 and b=1 -> -1.
inline Move move_from_index(std::uint64_t index) {
    return {static_cast<std::uint32_t>(index >> 1), (index & 1) ? -1 : +1};
}

inline Move move_from_registers(std::uint64_t move_id, std::uint64_t move_value) {
    return {static_cast<std::uint32_t>(move_id), move_value ? -1 : +1};
}

inline std::vector<Move> all_moves(const ProblemSpec& spec) {
    std::vector<Move> moves;
    moves.reserve(2 * spec.variables);
    for (std::uint64_t i = 0; i < 2ULL * spec.variables; ++i) {
        moves.push_back(move_from_index(i));
    }
    return moves;
}

// ---------------------------------------------------------------------------
// State packing: variable i occupies bits [i*Q, (i+1)*Q) of the basis index.
// ---------------------------------------------------------------------------

inline std::uint64_t encode(const std::vector<std::uint32_t>& values,
                            const ProblemSpec& spec) {
    if (values.size() != spec.variables) {
        throw std::invalid_argument("encode: expected " +
                                    std::to_string(spec.variables) + " values");
    }
    std::uint64_t basis = 0;
    for (std::uint32_t i = 0; i < spec.variables; ++i) {
        if (values[i] >= spec.values_per_variable()) {
            throw std::invalid_argument(
                "encode: value " + std::to_string(values[i]) + " of variable " +
                std::to_string(i) + " exceeds 2^Q - 1 = " +
                std::to_string(spec.values_per_variable() - 1));
        }
        basis |= static_cast<std::uint64_t>(values[i])
                 << (i * spec.qubits_per_variable);
    }
    return basis;
}

inline std::vector<std::uint32_t> decode(std::uint64_t basis,
                                         const ProblemSpec& spec) {
    std::vector<std::uint32_t> values(spec.variables);
    const std::uint64_t vmask = spec.values_per_variable() - 1;
    for (std::uint32_t i = 0; i < spec.variables; ++i) {
        values[i] = static_cast<std::uint32_t>(
            (basis >> (i * spec.qubits_per_variable)) & vmask);
    }
    return values;
}

/// Increments/decrements the moved variable modulo 2^Q; bijective per move.
inline std::vector<std::uint32_t> apply_move(std::vector<std::uint32_t> values,
                                             Move move, const ProblemSpec& spec) {
    if (move.variable >= spec.variables) {
        throw std::invalid_argument("apply_move: variable index out of range");
    }
    const std::uint32_t modulus = spec.values_per_variable();
    std::uint32_t& v = values[move.variable];
    v = (v + static_cast<std::uint32_t>(modulus + move.direction)) % modulus;
    return values;
}

/// Same move on a packed basis index (hot path for tables and permutations).
inline std::uint64_t apply_move_encoded(std::uint64_t basis, Move move,
                                        const ProblemSpec& spec) {
    const std::uint32_t q = spec.qubits_per_variable;
    const std::uint64_t vmask = spec.values_per_variable() - 1;
    const std::uint32_t shift = move.variable * q;
    const std::uint64_t v = (basis >> shift) & vmask;
    const std::uint64_t nv =
        (v + static_cast<std::uint64_t>(spec.values_per_variable() +
                                        move.direction)) & vmask;
    return (basis & ~(vmask << shift)) | (nv << shift);
}

// ---------------------------------------------------------------------------
// Metropolis acceptance (shared by the classical chain and the quantum coin)
// ---------------------------------------------------------------------------

/// min(1, e^(-beta * delta_cost)).
inline double acceptance_probability(double beta, double delta_cost) {
    return std::min(1.0, std::exp(-beta * delta_cost));
}

// ---------------------------------------------------------------------------
// Shipped cost functions
// ---------------------------------------------------------------------------

/// Number of unordered queen pairs sharing a column or diagonal (one queen
/// per row by encoding), plus a penalty of `board` per queen whose column
/// index is >= board (the off-board values of a non-power-of-two board).
inline double nqueens_cost(const std::vector<std::uint32_t>& columns,
                           std::uint32_t board) {
    double cost = 0.0;
    const std::uint32_t n = static_cast<std::uint32_t>(columns.size());
    for (std::uint32_t i = 0; i < n; ++i) {
        if (columns[i] >= board) {
            cost += board;
            continue;
        }
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (columns[j] >= board) continue;
            const std::int64_t dc = static_cast<std::int64_t>(columns[i]) -
                                    static_cast<std::int64_t>(columns[j]);
            if (dc == 0 || std::llabs(dc) == static_cast<std::int64_t>(j - i)) {
                cost += 1.0;
            }
        }
    }
    return cost;
}

/// One row per variable holding the queen's column; Q = ceil(log2 n).
inline ProblemSpec make_nqueens(std::uint32_t n) {
    if (n < 1) throw std::invalid_argument("make_nqueens: n must be >= 1");
    const std::uint32_t q = std::max(1u, ceil_log2(n));
    return ProblemSpec(
        n, q,
        [n](const std::vector<std::uint32_t>& columns) {
            return nqueens_cost(columns, n);
        },
        "nqueens-" + std::to_string(n));
}

/// Open-chain Ising energy -sum s_i s_{i+1} with unit coupling, no field;
/// bit b maps to spin 2b - 1.
inline double ising_chain_cost(const std::vector<std::uint32_t>& bits) {
    double energy = 0.0;
    for (std::size_t i = 0; i + 1 < bits.size(); ++i) {
        const int si = bits[i] ? 1 : -1;
        const int sj = bits[i + 1] ? 1 : -1;
        energy -= si * sj;
    }
    return energy;
}

inline ProblemSpec make_ising_chain(std::uint32_t n) {
    if (n < 2) throw std::invalid_argument("make_ising_chain: n must be >= 2");
    return ProblemSpec(n, 1, ising_chain_cost, "ising-" + std::to_string(n));
}

/// Affine map between grid indices {0..2^Q-1} and parameter values:
/// index i -> lower + (i + 1/2) * (upper - lower) / 2^Q (midpoint convention).
struct ParameterGrid {
    double lower = 0.0;
    double upper = 1.0;
    std::uint32_t qubits = 1;

    std::uint64_t cells() const { return 1ULL << qubits; }
    double cell_width() const {
        return (upper - lower) / static_cast<double>(cells());
    }
    double value(std::uint64_t index) const {
        return lower + (static_cast<double>(index) + 0.5) * cell_width();
    }
    /// Nearest grid index for a value, clamped into range.
    std::uint64_t index(double v) const {
        const double raw = std::floor((v - lower) / cell_width());
        if (raw < 0.0) return 0;
        const std::uint64_t i = static_cast<std::uint64_t>(raw);
        return i >= cells() ? cells() - 1 : i;
    }
};

/// Separable Gaussian negative log-likelihood on a grid:
/// C(theta) = 1/2 * sum_k ((theta_k - truth_k) / width_k)^2 with theta read
/// off the per-parameter grids. Zero exactly at the injected truth.
inline ProblemSpec make_gaussian_loglike(std::vector<ParameterGrid> grids,
                                         std::vector<double> truth,
                                         std::vector<double> widths) {
    const std::uint32_t p = static_cast<std::uint32_t>(grids.size());
    if (p == 0 || truth.size() != p || widths.size() != p) {
        throw std::invalid_argument(
            "make_gaussian_loglike: grids, truth and widths must have equal size");
    }
    const std::uint32_t q = grids[0].qubits;
    for (const ParameterGrid& g : grids) {
        if (g.qubits != q) {
            throw std::invalid_argument(
                "make_gaussian_loglike: all grids need the same qubit count");
        }
    }
    for (double w : widths) {
        if (!(w > 0.0)) {
            throw std::invalid_argument("make_gaussian_loglike: widths must be > 0");
        }
    }
    return ProblemSpec(
        p, q,
        [grids = std::move(grids), truth = std::move(truth),
         widths = std::move(widths)](const std::vector<std::uint32_t>& values) {
            double c = 0.0;
            for (std::size_t k = 0; k < grids.size(); ++k) {
                const double d = (grids[k].value(values[k]) - truth[k]) / widths[k];
                c += 0.5 * d * d;
            }
            return c;
        },
        "gaussian-loglike-" + std::to_string(p) + "p");
}

// ---------------------------------------------------------------------------
// Exhaustive oracles
// ---------------------------------------------------------------------------

namespace detail {

inline void check_state_capacity(const ProblemSpec& spec, std::uint32_t limit,
                                 const char* what) {
    if (spec.state_qubits() > limit) {
        throw CapacityError(std::string(what) + ": " +
                            std::to_string(spec.state_qubits()) +
                            " state qubits exceed the limit of " +
                            std::to_string(limit));
    }
}

} // namespace detail

/// Every cost over the full state space, indexed by the packed basis state.
inline std::vector<double> build_cost_table(const ProblemSpec& spec,
                                            std::uint32_t limit = kDefaultQubitLimit) {
    detail::check_state_capacity(spec, limit, "build_cost_table");
    std::vector<double> table(spec.state_count());
    for (std::uint64_t s = 0; s < table.size(); ++s) {
        table[s] = spec.cost(decode(s, spec));
    }
    return table;
}

struct GroundSet {
    double min_cost = 0.0;
    std::vector<std::uint64_t> states; // packed basis indices, ascending
};

/// Exhaustive scan; the authoritative ground-state set.
inline GroundSet brute_force_ground(const ProblemSpec& spec,
                                    std::uint32_t limit = kDefaultQubitLimit) {
    const std::vector<double> costs = build_cost_table(spec, limit);
    GroundSet ground;
    ground.min_cost = costs[0];
    for (std::uint64_t s = 1; s < costs.size(); ++s) {
        if (costs[s] < ground.min_cost) ground.min_cost = costs[s];
    }
    for (std::uint64_t s = 0; s < costs.size(); ++s) {
        if (costs[s] == ground.min_cost) ground.states.push_back(s);
    }
    return ground;
}

struct BoltzmannTable {
    double beta = 0.0;
    std::vector<double> probabilities; // over all 2^(P*Q) states
};

/// Normalized e^(-beta * C) over the full state space. The minimum cost is
/// subtracted before exponentiating, which also makes the table invariant
/// under adding a constant to all costs.
inline BoltzmannTable boltzmann(const ProblemSpec& spec, double beta,
                                std::uint32_t limit = kDefaultQubitLimit) {
    const std::vector<double> costs = build_cost_table(spec, limit);
    double min_cost = costs[0];
    for (double c : costs) min_cost = std::min(min_cost, c);
    BoltzmannTable table{beta, std::vector<double>(costs.size())};
    double z = 0.0;
    for (std::uint64_t s = 0; s < costs.size(); ++s) {
        table.probabilities[s] = std::exp(-beta * (costs[s] - min_cost));
        z += table.probabilities[s];
    }
    for (double& p : table.probabilities) p /= z;
    return table;
}

} // namespace qmh
