#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "qmh/problem.hpp"
#include "qmh/schedule.hpp"
#include "qmh/statevector.hpp"

namespace qmh {

/// Which registers the walk's reflection acts on. MoveCoin reflects about
/// |0> of the move and coin registers and leaves the state register alone;
/// StateCoin reflects about |0> of the state and coin registers instead.
/// Both are provided; MoveCoin is the default.
enum class ReflectionTarget { MoveCoin, StateCoin };

enum class InitialState { Uniform, Basis };

struct WalkConfig {
    AnnealingSchedule schedule;
    std::uint64_t steps = 0;               // L
    std::uint32_t acceptance_qubits = 0;   // a; > 0 quantizes coin angles to 2^a levels
    ReflectionTarget reflection_target = ReflectionTarget::MoveCoin;
    InitialState initial_state = InitialState::Uniform;
    std::uint64_t initial_basis = 0;       // state-register value when Basis
    std::uint32_t qubit_limit = kDefaultQubitLimit;
};

struct WalkStepReport {
    std::uint64_t t = 0;             // 0 is the prepared initial state
    double beta = 0.0;               // value used for this step
    double ground_probability = 0.0; // state-register mass on the ground set
};

// ---------------------------------------------------------------------------
// Component builders
// ---------------------------------------------------------------------------

/// Move preparation V: from move registers in |0>, puts equal amplitude
/// 1/sqrt(2P) on every valid (move id, move value) pair. Power-of-two P uses
/// Hadamards; otherwise a rotation tree leaves invalid ids at amplitude 0.
inline std::vector<GateOp> build_move_preparation(const RegisterLayout& layout) {
    std::vector<GateOp> gates;
    const QubitRange id = layout.move_id();
    const std::uint32_t p = layout.variables;
    if ((p & (p - 1)) == 0) {
        for (std::uint32_t q = 0; q < id.count; ++q) {
            gates.push_back({.kind = GateKind::Hadamard, .target = id.first + q});
        }
    } else {
        // Rotation tree, most significant id bit first: at bit b the angle is
        // chosen per prefix so each subtree carries amplitude proportional to
        // the square root of its count of valid ids.
        for (std::uint32_t b = id.count; b-- > 0;) {
            GateOp gate;
            gate.kind = GateKind::MultiplexedRotationY;
            gate.target = id.first + b;
            gate.control_register = QubitRange{id.first + b + 1, id.count - 1 - b};
            const std::uint64_t block = 1ULL << (b + 1);
            gate.angle_table.resize(gate.control_register.size());
            for (std::uint64_t prefix = 0; prefix < gate.angle_table.size(); ++prefix) {
                const std::uint64_t lo = prefix * block;
                const std::uint64_t mid = lo + (block >> 1);
                const std::uint64_t hi = lo + block;
                const auto clamp = [&](std::uint64_t a, std::uint64_t bnd) {
                    return a > bnd ? bnd : a;
                };
                const double n0 = static_cast<double>(clamp(mid, p) - clamp(lo, p));
                const double n1 = static_cast<double>(clamp(hi, p) - clamp(mid, p));
                gate.angle_table[prefix] =
                    (n0 + n1 > 0.0) ? 2.0 * std::atan2(std::sqrt(n1), std::sqrt(n0))
                                    : 0.0;
            }
            gates.push_back(std::move(gate));
        }
    }
    gates.push_back(
        {.kind = GateKind::Hadamard, .target = layout.move_value().first});
    return gates;
}

/// Coin rotation angles for B, indexed by the packed (state, move) register
/// value: theta = 2 asin(sqrt(A)) with A = min(1, e^(-beta * deltaC)), so a
/// coin prepared in |0> reads P(coin = 1) = A. Invalid move ids get theta 0.
/// quantization_bits > 0 rounds A to the nearest multiple of 2^-a first.
inline std::vector<double> build_coin_angles(const RegisterLayout& layout,
                                             const ProblemSpec& spec, double beta,
                                             const std::vector<double>& cost_table,
                                             std::uint32_t quantization_bits = 0) {
    const std::uint64_t state_bits = layout.state_qubits();
    const std::uint64_t state_mask = (1ULL << state_bits) - 1;
    const std::uint32_t id_bits = layout.move_id_qubits();
    const std::uint64_t id_mask = (1ULL << id_bits) - 1;
    const std::uint64_t table_size = 1ULL << (state_bits + id_bits + 1);
    const double levels = std::exp2(static_cast<double>(quantization_bits));

    std::vector<double> angles(table_size, 0.0);
    for (std::uint64_t v = 0; v < table_size; ++v) {
        const std::uint64_t s = v & state_mask;
        const std::uint64_t id = (v >> state_bits) & id_mask;
        const std::uint64_t value_bit = v >> (state_bits + id_bits);
        if (id >= layout.variables) continue;
        const Move move = move_from_registers(id, value_bit);
        const std::uint64_t s2 = apply_move_encoded(s, move, spec);
        double accept = acceptance_probability(beta, cost_table[s2] - cost_table[s]);
        if (quantization_bits > 0) {
            accept = std::min(1.0, std::max(0.0, std::round(accept * levels) / levels));
        }
        angles[v] = 2.0 * std::asin(std::sqrt(accept));
    }
    return angles;
}

/// Flip permutation for F on the packed (state, move) subspace: with the
/// coin at |1>, |s>|m> -> |apply_move(s,m)>|m>; invalid ids map to themselves.
inline std::vector<std::uint64_t> build_flip_permutation(const RegisterLayout& layout,
                                                         const ProblemSpec& spec) {
    const std::uint64_t state_bits = layout.state_qubits();
    const std::uint64_t state_mask = (1ULL << state_bits) - 1;
    const std::uint32_t id_bits = layout.move_id_qubits();
    const std::uint64_t id_mask = (1ULL << id_bits) - 1;
    const std::uint64_t size = 1ULL << (state_bits + id_bits + 1);

    std::vector<std::uint64_t> perm(size);
    for (std::uint64_t v = 0; v < size; ++v) {
        const std::uint64_t s = v & state_mask;
        const std::uint64_t id = (v >> state_bits) & id_mask;
        const std::uint64_t value_bit = v >> (state_bits + id_bits);
        if (id >= layout.variables) {
            perm[v] = v;
            continue;
        }
        const Move move = move_from_registers(id, value_bit);
        perm[v] = (v & ~state_mask) | apply_move_encoded(s, move, spec);
    }
    return perm;
}

/// Qubit mask the reflection R acts on.
inline std::uint64_t reflection_mask(const RegisterLayout& layout,
                                     ReflectionTarget target) {
    if (target == ReflectionTarget::MoveCoin) {
        return layout.move().mask() | layout.coin().mask();
    }
    return layout.state().mask() | layout.coin().mask();
}

// ---------------------------------------------------------------------------
// The walk step U(beta) = R V' B' F B V  (primes are adjoints)
// ---------------------------------------------------------------------------

/// One walk step at a fixed beta. Immutable once built and shareable across
/// threads; tables are precomputed so apply() is a handful of O(2^n) sweeps.
class WalkOperator {
public:
    WalkOperator(const ProblemSpec& spec, const RegisterLayout& layout,
                 double beta, const std::vector<double>& cost_table,
                 ReflectionTarget target = ReflectionTarget::MoveCoin,
                 std::uint32_t quantization_bits = 0)
        : layout_(layout), beta_(beta),
          v_gates_(build_move_preparation(layout)),
          coin_angles_(build_coin_angles(layout, spec, beta, cost_table,
                                         quantization_bits)),
          flip_perm_(build_flip_permutation(layout, spec)),
          reflection_mask_(reflection_mask(layout, target)) {}

    WalkOperator(const ProblemSpec& spec, const RegisterLayout& layout, double beta,
                 ReflectionTarget target = ReflectionTarget::MoveCoin,
                 std::uint32_t quantization_bits = 0)
        : WalkOperator(spec, layout, beta, build_cost_table(spec), target,
                       quantization_bits) {}

    const RegisterLayout& layout() const { return layout_; }
    double beta() const { return beta_; }
    const std::vector<double>& coin_angles() const { return coin_angles_; }

    void apply_V(Statevector& psi) const {
        for (const GateOp& g : v_gates_) apply_gate(psi, g);
    }
    void apply_V_adjoint(Statevector& psi) const {
        for (auto it = v_gates_.rbegin(); it != v_gates_.rend(); ++it) {
            apply_gate(psi, adjoint(*it));
        }
    }

    void apply_B(Statevector& psi) const { apply_B_impl(psi, +1.0); }
    void apply_B_adjoint(Statevector& psi) const { apply_B_impl(psi, -1.0); }

    void apply_F(Statevector& psi) const {
        permute(psi, /*forward=*/true);
    }
    void apply_F_adjoint(Statevector& psi) const {
        permute(psi, /*forward=*/false);
    }

    void apply_R(Statevector& psi) const {
        apply_reflection_about_zero(psi, reflection_mask_);
    }

    void apply(Statevector& psi) const {
        apply_V(psi);
        apply_B(psi);
        apply_F(psi);
        apply_B_adjoint(psi);
        apply_V_adjoint(psi);
        apply_R(psi);
    }

    void apply_adjoint(Statevector& psi) const {
        apply_R(psi); // R is self-adjoint
        apply_V(psi);
        apply_B(psi);
        apply_F_adjoint(psi);
        apply_B_adjoint(psi);
        apply_V_adjoint(psi);
    }

private:
    void apply_B_impl(Statevector& psi, double sign) const {
        const QubitRange controls{0, layout_.state_qubits() +
                                         layout_.move_id_qubits() + 1};
        if (sign > 0) {
            apply_multiplexed_ry(psi, controls, layout_.coin().first, coin_angles_);
        } else {
            std::vector<double> negated(coin_angles_);
            for (double& a : negated) a = -a;
            apply_multiplexed_ry(psi, controls, layout_.coin().first, negated);
        }
    }

    void permute(Statevector& psi, bool forward) const {
        const std::uint64_t sm_mask = flip_perm_.size() - 1;
        const std::uint64_t coin_bit = layout_.coin().mask();
        const std::uint64_t dim = psi.dim();
        std::vector<Complex> scratch(dim);
        for (std::uint64_t i = 0; i < dim; ++i) {
            if (i & coin_bit) {
                const std::uint64_t j = (i & ~sm_mask) | flip_perm_[i & sm_mask];
                if (forward) {
                    scratch[j] = psi[i];
                } else {
                    scratch[i] = psi[j];
                }
            } else {
                scratch[i] = psi[i];
            }
        }
        psi.amplitudes().swap(scratch);
    }

    RegisterLayout layout_;
    double beta_;
    std::vector<GateOp> v_gates_;
    std::vector<double> coin_angles_;
    std::vector<std::uint64_t> flip_perm_;
    std::uint64_t reflection_mask_;
};

// ---------------------------------------------------------------------------
// Evolution under a beta schedule
// ---------------------------------------------------------------------------

struct EvolveResult {
    std::vector<WalkStepReport> reports; // length steps + 1, entry 0 is t = 0
    Statevector final_state;
    GroundSet ground;
};

/// Prepares the initial state (uniform over the state register by default,
/// move/coin/acceptance at |0>), then applies U(beta_t) for t = 1..L with
/// beta_t = schedule.beta(t-1), recording the ground-state mass after every
/// step. An optional observer sees the state after each step (including t=0).
template <typename Observer>
inline EvolveResult evolve(const WalkConfig& config, const ProblemSpec& spec,
                           Observer&& observer) {
    const RegisterLayout layout = spec.layout(config.acceptance_qubits);
    if (layout.total_qubits() > config.qubit_limit) {
        throw CapacityError("walk needs " + std::to_string(layout.total_qubits()) +
                            " qubits, exceeding the limit of " +
                            std::to_string(config.qubit_limit));
    }
    const std::vector<double> cost_table = build_cost_table(spec, config.qubit_limit);
    GroundSet ground;
    ground.min_cost = cost_table[0];
    for (double c : cost_table) ground.min_cost = std::min(ground.min_cost, c);
    for (std::uint64_t s = 0; s < cost_table.size(); ++s) {
        if (cost_table[s] == ground.min_cost) ground.states.push_back(s);
    }

    Statevector psi = init_zero(layout, config.qubit_limit);
    const QubitRange state = layout.state();
    if (config.initial_state == InitialState::Uniform) {
        for (std::uint32_t q = 0; q < state.count; ++q) {
            apply_hadamard(psi, state.first + q);
        }
    } else {
        if (config.initial_basis >= spec.state_count()) {
            throw std::invalid_argument("initial basis state out of range");
        }
        psi.set_basis_state(config.initial_basis);
    }

    const auto ground_probability = [&](const Statevector& v) {
        const std::vector<double> marginal = marginal_distribution(v, state);
        double mass = 0.0;
        for (std::uint64_t g : ground.states) mass += marginal[g];
        return mass;
    };

    std::vector<WalkStepReport> reports;
    reports.reserve(config.steps + 1);
    reports.push_back({0, config.schedule.beta(0), ground_probability(psi)});
    observer(std::uint64_t{0}, psi);

    std::unique_ptr<WalkOperator> op;
    for (std::uint64_t t = 1; t <= config.steps; ++t) {
        const double beta = config.schedule.beta(t - 1);
        if (!op || op->beta() != beta) {
            op = std::make_unique<WalkOperator>(spec, layout, beta, cost_table,
                                                config.reflection_target,
                                                config.acceptance_qubits);
        }
        op->apply(psi);
        reports.push_back({t, beta, ground_probability(psi)});
        observer(t, psi);
    }
    return EvolveResult{std::move(reports), std::move(psi), std::move(ground)};
}

inline EvolveResult evolve(const WalkConfig& config, const ProblemSpec& spec) {
    return evolve(config, spec, [](std::uint64_t, const Statevector&) {});
}

} // namespace qmh
