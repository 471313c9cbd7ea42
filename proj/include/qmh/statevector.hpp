#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmh/rng.hpp"

namespace qmh {

using Complex = std::complex<double>;

/// Thrown when a requested simulation exceeds the configured qubit ceiling.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 2^24 complex doubles is ~256 MB, the desk-scale ceiling.
inline constexpr std::uint32_t kDefaultQubitLimit = 24;

inline std::uint32_t ceil_log2(std::uint64_t n) {
    return n <= 1 ? 0u : static_cast<std::uint32_t>(std::bit_width(n - 1));
}

/// Contiguous block of qubits. Qubit 0 is the least significant bit of the
/// basis-state index everywhere in this library.
struct QubitRange {
    std::uint32_t first = 0;
    std::uint32_t count = 0;

    std::uint64_t size() const { return 1ULL << count; }
    std::uint64_t value_mask() const { return (1ULL << count) - 1; }
    std::uint64_t mask() const { return value_mask() << first; }
    std::uint64_t extract(std::uint64_t basis) const {
        return (basis >> first) & value_mask();
    }
    std::uint64_t insert(std::uint64_t basis, std::uint64_t value) const {
        return (basis & ~mask()) | ((value & value_mask()) << first);
    }
};

/// Register map for the walk circuits, packed from the low bits upward:
/// state | move id | move value | coin | acceptance.
/// Total is P*Q + ceil(log2 P) + a + 2.
struct RegisterLayout {
    std::uint32_t variables = 1;          // P
    std::uint32_t qubits_per_variable = 1; // Q
    std::uint32_t acceptance_qubits = 0;   // a

    std::uint32_t state_qubits() const { return variables * qubits_per_variable; }
    std::uint32_t move_id_qubits() const { return ceil_log2(variables); }

    QubitRange state() const { return {0, state_qubits()}; }
    QubitRange move_id() const { return {state_qubits(), move_id_qubits()}; }
    QubitRange move_value() const { return {state_qubits() + move_id_qubits(), 1}; }
    QubitRange coin() const { return {state_qubits() + move_id_qubits() + 1, 1}; }
    QubitRange acceptance() const {
        return {state_qubits() + move_id_qubits() + 2, acceptance_qubits};
    }
    /// move id and move value registers combined.
    QubitRange move() const { return {state_qubits(), move_id_qubits() + 1}; }

    std::uint32_t total_qubits() const {
        return state_qubits() + move_id_qubits() + acceptance_qubits + 2;
    }
};

/// Dense complex statevector over 2^n basis states. Gates mutate amplitudes
/// in place with stride iteration per target qubit; no sparse mode.
class Statevector {
public:
    explicit Statevector(std::uint32_t n_qubits,
                         std::uint32_t qubit_limit = kDefaultQubitLimit)
        : n_qubits_(n_qubits) {
        if (n_qubits > qubit_limit) {
            throw CapacityError("statevector of " + std::to_string(n_qubits) +
                                " qubits exceeds the limit of " +
                                std::to_string(qubit_limit) + " qubits");
        }
        amps_.assign(1ULL << n_qubits, Complex{0.0, 0.0});
        amps_[0] = Complex{1.0, 0.0};
    }

    std::uint32_t n_qubits() const { return n_qubits_; }
    std::uint64_t dim() const { return amps_.size(); }

    Complex& operator[](std::uint64_t i) { return amps_[i]; }
    const Complex& operator[](std::uint64_t i) const { return amps_[i]; }
    std::vector<Complex>& amplitudes() { return amps_; }
    const std::vector<Complex>& amplitudes() const { return amps_; }

    /// Collapse to a single basis state (for basis-state initialisation).
    void set_basis_state(std::uint64_t basis) {
        if (basis >= dim()) {
            throw std::out_of_range("basis state out of range");
        }
        std::fill(amps_.begin(), amps_.end(), Complex{0.0, 0.0});
        amps_[basis] = Complex{1.0, 0.0};
    }

    double norm() const {
        double acc = 0.0;
        for (const Complex& a : amps_) acc += std::norm(a);
        return std::sqrt(acc);
    }

private:
    std::uint32_t n_qubits_;
    std::vector<Complex> amps_;
};

/// All-zeros state over the layout's full register set.
inline Statevector init_zero(const RegisterLayout& layout,
                             std::uint32_t qubit_limit = kDefaultQubitLimit) {
    return Statevector(layout.total_qubits(), qubit_limit);
}

// ---------------------------------------------------------------------------
// Gate vocabulary
// ---------------------------------------------------------------------------

enum class GateKind {
    Hadamard,
    PauliX,
    ControlledNot,
    MultiControlledX,
    RotationY,
    MultiplexedRotationY,
    PhaseFlipOnBasisSet,
};

/// One primitive gate. Only the fields relevant to `kind` are read:
///   Hadamard/PauliX            target
///   ControlledNot              controls[0], target
///   MultiControlledX           controls, target
///   RotationY                  target, angle
///   MultiplexedRotationY       control_register, target, angle_table
///                              (table indexed by the control register value)
///   PhaseFlipOnBasisSet        control_register, marked (basis values of the
///                              register whose amplitudes are negated)
struct GateOp {
    GateKind kind = GateKind::Hadamard;
    std::uint32_t target = 0;
    std::vector<std::uint32_t> controls;
    double angle = 0.0;
    QubitRange control_register;
    std::vector<double> angle_table;
    std::vector<std::uint64_t> marked;
};

inline GateOp adjoint(const GateOp& g) {
    GateOp adj = g;
    switch (g.kind) {
    case GateKind::RotationY:
        adj.angle = -g.angle;
        break;
    case GateKind::MultiplexedRotationY:
        for (double& a : adj.angle_table) a = -a;
        break;
    default:
        break; // H, X, CX, MCX and phase flips are involutions
    }
    return adj;
}

namespace detail {

inline void check_qubit(const Statevector& psi, std::uint32_t q,
                        const char* what) {
    if (q >= psi.n_qubits()) {
        throw std::out_of_range(std::string(what) + " qubit " +
                                std::to_string(q) + " out of range for " +
                                std::to_string(psi.n_qubits()) + " qubits");
    }
}

/// Visit every (i0, i1) amplitude pair differing only in `target`.
template <typename F>
inline void for_each_pair(Statevector& psi, std::uint32_t target, F&& body) {
    const std::uint64_t stride = 1ULL << target;
    const std::uint64_t dim = psi.dim();
    for (std::uint64_t base = 0; base < dim; base += stride << 1) {
        for (std::uint64_t i0 = base; i0 < base + stride; ++i0) {
            body(i0, i0 | stride);
        }
    }
}

} // namespace detail

inline void apply_hadamard(Statevector& psi, std::uint32_t target) {
    detail::check_qubit(psi, target, "target");
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    detail::for_each_pair(psi, target, [&](std::uint64_t i0, std::uint64_t i1) {
        const Complex a0 = psi[i0];
        const Complex a1 = psi[i1];
        psi[i0] = (a0 + a1) * inv_sqrt2;
        psi[i1] = (a0 - a1) * inv_sqrt2;
    });
}

inline void apply_pauli_x(Statevector& psi, std::uint32_t target) {
    detail::check_qubit(psi, target, "target");
    detail::for_each_pair(psi, target, [&](std::uint64_t i0, std::uint64_t i1) {
        std::swap(psi[i0], psi[i1]);
    });
}

inline void apply_mcx(Statevector& psi,
                      const std::vector<std::uint32_t>& controls,
                      std::uint32_t target) {
    detail::check_qubit(psi, target, "target");
    std::uint64_t cmask = 0;
    for (std::uint32_t c : controls) {
        detail::check_qubit(psi, c, "control");
        if (c == target) {
            throw std::invalid_argument("control equals target qubit");
        }
        cmask |= 1ULL << c;
    }
    detail::for_each_pair(psi, target, [&](std::uint64_t i0, std::uint64_t i1) {
        if ((i0 & cmask) == cmask) std::swap(psi[i0], psi[i1]);
    });
}

inline void apply_cnot(Statevector& psi, std::uint32_t control,
                       std::uint32_t target) {
    apply_mcx(psi, {control}, target);
}

inline void apply_ry(Statevector& psi, std::uint32_t target, double angle) {
    detail::check_qubit(psi, target, "target");
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    detail::for_each_pair(psi, target, [&](std::uint64_t i0, std::uint64_t i1) {
        const Complex a0 = psi[i0];
        const Complex a1 = psi[i1];
        psi[i0] = c * a0 - s * a1;
        psi[i1] = s * a0 + c * a1;
    });
}

/// Y-rotation of `target` whose angle is selected by the basis value of
/// `controls`: angles[v] acts on the subspace where the control register
/// reads v. The table must cover every control value.
inline void apply_multiplexed_ry(Statevector& psi, QubitRange controls,
                                 std::uint32_t target,
                                 const std::vector<double>& angles) {
    detail::check_qubit(psi, target, "target");
    if (controls.count > 0) {
        detail::check_qubit(psi, controls.first + controls.count - 1, "control");
    }
    if (target >= controls.first && target < controls.first + controls.count) {
        throw std::invalid_argument("multiplexed target inside control register");
    }
    if (angles.size() != controls.size()) {
        throw std::invalid_argument("angle table size does not match control register");
    }
    // Cache per-value sin/cos; tables are reused across the whole pair sweep.
    std::vector<double> cs(angles.size()), sn(angles.size());
    for (std::size_t v = 0; v < angles.size(); ++v) {
        cs[v] = std::cos(angles[v] / 2.0);
        sn[v] = std::sin(angles[v] / 2.0);
    }
    detail::for_each_pair(psi, target, [&](std::uint64_t i0, std::uint64_t i1) {
        const std::uint64_t v = controls.extract(i0);
        const Complex a0 = psi[i0];
        const Complex a1 = psi[i1];
        psi[i0] = cs[v] * a0 - sn[v] * a1;
        psi[i1] = sn[v] * a0 + cs[v] * a1;
    });
}

/// Multiplies the amplitude of every basis state whose `reg` value is in
/// `marked` by -1 (the Grover-style marking oracle).
inline void apply_phase_oracle(Statevector& psi, QubitRange reg,
                               const std::vector<std::uint64_t>& marked) {
    if (reg.first + reg.count > psi.n_qubits()) {
        throw std::out_of_range("register out of range");
    }
    std::vector<std::uint8_t> flip(reg.size(), 0);
    for (std::uint64_t m : marked) {
        if (m >= reg.size()) {
            throw std::out_of_range("marked basis state " + std::to_string(m) +
                                    " outside register of size " +
                                    std::to_string(reg.size()));
        }
        flip[m] = 1;
    }
    const std::uint64_t dim = psi.dim();
    for (std::uint64_t i = 0; i < dim; ++i) {
        if (flip[reg.extract(i)]) psi[i] = -psi[i];
    }
}

/// 2|0><0| - 1 on the qubits selected by `mask`: +1 on the all-zero
/// configuration, -1 elsewhere.
inline void apply_reflection_about_zero(Statevector& psi, std::uint64_t mask) {
    const std::uint64_t dim = psi.dim();
    if (psi.n_qubits() < 64 && (mask >> psi.n_qubits()) != 0) {
        throw std::out_of_range("reflection mask out of range");
    }
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & mask) != 0) psi[i] = -psi[i];
    }
}

inline void apply_reflection_about_zero(Statevector& psi, QubitRange reg) {
    apply_reflection_about_zero(psi, reg.mask());
}

/// Inversion about the mean on `reg`: H^n (2|0><0| - 1) H^n. The sign is
/// fixed so that Grover search amplifies the marked state.
inline void apply_diffusion(Statevector& psi, QubitRange reg) {
    if (reg.first + reg.count > psi.n_qubits()) {
        throw std::out_of_range("register out of range");
    }
    for (std::uint32_t q = 0; q < reg.count; ++q) apply_hadamard(psi, reg.first + q);
    apply_reflection_about_zero(psi, reg);
    for (std::uint32_t q = 0; q < reg.count; ++q) apply_hadamard(psi, reg.first + q);
}

inline void apply_gate(Statevector& psi, const GateOp& g) {
    switch (g.kind) {
    case GateKind::Hadamard:
        apply_hadamard(psi, g.target);
        break;
    case GateKind::PauliX:
        apply_pauli_x(psi, g.target);
        break;
    case GateKind::ControlledNot:
        if (g.controls.size() != 1) {
            throw std::invalid_argument("ControlledNot needs exactly one control");
        }
        apply_cnot(psi, g.controls[0], g.target);
        break;
    case GateKind::MultiControlledX:
        apply_mcx(psi, g.controls, g.target);
        break;
    case GateKind::RotationY:
        apply_ry(psi, g.target, g.angle);
        break;
    case GateKind::MultiplexedRotationY:
        apply_multiplexed_ry(psi, g.control_register, g.target, g.angle_table);
        break;
    case GateKind::PhaseFlipOnBasisSet:
        apply_phase_oracle(psi, g.control_register, g.marked);
        break;
    }
}

// ---------------------------------------------------------------------------
// Measurement-side queries
// ---------------------------------------------------------------------------

/// Probability of each basis value of `reg`, summing to 1 (up to rounding).
inline std::vector<double> marginal_distribution(const Statevector& psi,
                                                 QubitRange reg) {
    if (reg.first + reg.count > psi.n_qubits()) {
        throw std::out_of_range("register out of range");
    }
    std::vector<double> probs(reg.size(), 0.0);
    const std::uint64_t dim = psi.dim();
    for (std::uint64_t i = 0; i < dim; ++i) {
        probs[reg.extract(i)] += std::norm(psi[i]);
    }
    return probs;
}

/// `shots` i.i.d. draws of the register value, in draw order. Deterministic
/// for a fixed rng state.
inline std::vector<std::uint64_t> sample(const Statevector& psi, QubitRange reg,
                                         std::uint64_t shots, Rng& rng) {
    if (shots == 0) {
        throw std::invalid_argument("sample: shots must be >= 1");
    }
    const DiscreteSampler draw(marginal_distribution(psi, reg));
    std::vector<std::uint64_t> out;
    out.reserve(shots);
    for (std::uint64_t s = 0; s < shots; ++s) out.push_back(draw(rng));
    return out;
}

inline std::vector<std::uint64_t> sample(const Statevector& psi, QubitRange reg,
                                         std::uint64_t shots, std::uint64_t seed) {
    Rng rng = make_rng(seed, "sample");
    return sample(psi, reg, shots, rng);
}

// ---------------------------------------------------------------------------
// Grover search, used as the validation harness for the reflection primitives
// ---------------------------------------------------------------------------

/// Runs `iterations` rounds of (oracle, diffusion) from the uniform state and
/// returns the probability of measuring `marked`.
inline double grover_search(std::uint32_t n, std::uint64_t marked,
                            std::uint32_t iterations,
                            std::uint32_t qubit_limit = kDefaultQubitLimit) {
    if (n < 1) throw std::invalid_argument("grover_search: n must be >= 1");
    Statevector psi(n, qubit_limit);
    const QubitRange all{0, n};
    if (marked >= all.size()) {
        throw std::out_of_range("marked state out of range");
    }
    for (std::uint32_t q = 0; q < n; ++q) apply_hadamard(psi, q);
    for (std::uint32_t k = 0; k < iterations; ++k) {
        apply_phase_oracle(psi, all, {marked});
        apply_diffusion(psi, all);
    }
    return marginal_distribution(psi, all)[marked];
}

} // namespace qmh
