#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "qmh/problem.hpp"
#include "qmh/schedule.hpp"
#include "qmh/statevector.hpp"
#include "qmh/walk.hpp"

using namespace qmh;

namespace {

Statevector random_state(std::uint32_t n, std::uint64_t seed) {
    Statevector psi(n);
    Rng rng = make_rng(seed, "walk-random-state");
    double norm2 = 0.0;
    for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        psi[i] = Complex{next_double(rng) - 0.5, next_double(rng) - 0.5};
        norm2 += std::norm(psi[i]);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::uint64_t i = 0; i < psi.dim(); ++i) psi[i] *= inv;
    return psi;
}

double max_abs_diff(const Statevector& a, const Statevector& b) {
    double m = 0.0;
    for (std::uint64_t i = 0; i < a.dim(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

/// Column-by-column evaluation of max_ij |(U'U - I)_ij| without storing the
/// dense matrix: U'U e_j is exactly column j.
double unitarity_defect(const WalkOperator& op, std::uint32_t n_qubits) {
    const std::uint64_t dim = 1ULL << n_qubits;
    double worst = 0.0;
    for (std::uint64_t j = 0; j < dim; ++j) {
        Statevector column(n_qubits);
        column.set_basis_state(j);
        op.apply(column);
        op.apply_adjoint(column);
        for (std::uint64_t i = 0; i < dim; ++i) {
            const double expected = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(column[i] - Complex{expected, 0.0}));
        }
    }
    return worst;
}

/// P(coin = 1) after B from the computational basis state (s, move, coin=0).
double coin_probability(const WalkOperator& op, const RegisterLayout& layout,
                        std::uint64_t state, std::uint64_t move_id,
                        std::uint64_t move_value) {
    Statevector psi(layout.total_qubits());
    std::uint64_t basis = state;
    basis = layout.move_id().insert(basis, move_id);
    basis = layout.move_value().insert(basis, move_value);
    psi.set_basis_state(basis);
    op.apply_B(psi);
    return marginal_distribution(psi, layout.coin())[1];
}

} // namespace

TEST_CASE("move preparation V") {
    SECTION("P = 2: four move states at amplitude 1/2") {
        const ProblemSpec spec = make_ising_chain(2);
        const RegisterLayout layout = spec.layout();
        const WalkOperator op(spec, layout, 1.0);
        Statevector psi(layout.total_qubits());
        op.apply_V(psi);
        const auto probs = marginal_distribution(psi, layout.move());
        REQUIRE(probs.size() == 4);
        for (double p : probs) CHECK(std::abs(p - 0.25) < 1e-12);
        // Amplitudes themselves are +1/2 (real, non-negative preparation).
        for (std::uint64_t m = 0; m < 4; ++m) {
            const std::uint64_t basis = layout.move().insert(0, m);
            CHECK(std::abs(psi[basis] - Complex{0.5, 0.0}) < 1e-12);
        }
    }
    SECTION("P = 3: six valid moves at 1/sqrt(6), invalid ids at zero") {
        const ProblemSpec spec = make_ising_chain(3);
        const RegisterLayout layout = spec.layout();
        const WalkOperator op(spec, layout, 1.0);
        Statevector psi(layout.total_qubits());
        op.apply_V(psi);
        const double amp = 1.0 / std::sqrt(6.0);
        for (std::uint64_t id = 0; id < 4; ++id) {
            for (std::uint64_t v = 0; v < 2; ++v) {
                std::uint64_t basis = layout.move_id().insert(0, id);
                basis = layout.move_value().insert(basis, v);
                if (id < 3) {
                    CHECK(std::abs(psi[basis] - Complex{amp, 0.0}) < 1e-12);
                } else {
                    CHECK(std::abs(psi[basis]) < 1e-12);
                }
            }
        }
    }
    SECTION("V adjoint V is the identity") {
        const ProblemSpec spec = make_ising_chain(3);
        const WalkOperator op(spec, spec.layout(), 0.7);
        Statevector psi = random_state(spec.layout().total_qubits(), 42);
        const Statevector original = psi;
        op.apply_V(psi);
        op.apply_V_adjoint(psi);
        CHECK(max_abs_diff(psi, original) < 1e-10);
    }
}

TEST_CASE("coin rotation B realizes the acceptance law") {
    SECTION("exhaustive coin law on the Ising chain, beta grid") {
        const ProblemSpec spec = make_ising_chain(4);
        const RegisterLayout layout = spec.layout();
        const std::vector<double> costs = build_cost_table(spec);
        for (double beta : {0.0, 0.5, 1.0, 2.0}) {
            const WalkOperator op(spec, layout, beta);
            for (std::uint64_t s = 0; s < spec.state_count(); ++s) {
                for (std::uint64_t id = 0; id < spec.variables; ++id) {
                    for (std::uint64_t v = 0; v < 2; ++v) {
                        const Move move = move_from_registers(id, v);
                        const double expected = acceptance_probability(
                            beta, costs[apply_move_encoded(s, move, spec)] - costs[s]);
                        CHECK(std::abs(coin_probability(op, layout, s, id, v) -
                                       expected) < 1e-12);
                    }
                }
            }
        }
    }
    SECTION("downhill moves load a certain coin") {
        const ProblemSpec spec = make_ising_chain(3);
        const RegisterLayout layout = spec.layout();
        const WalkOperator op(spec, layout, 5.0);
        // State 010 -> flipping the middle bit to 0 reaches the ground state.
        CHECK(std::abs(coin_probability(op, layout, 0b010, 1, 1) - 1.0) < 1e-12);
    }
    SECTION("beta = 1, deltaC = 1 gives e^-1") {
        const ProblemSpec two(1, 1,
                              [](const std::vector<std::uint32_t>& v) {
                                  return v[0] == 0 ? 0.0 : 1.0;
                              },
                              "two-state");
        const RegisterLayout layout = two.layout();
        const WalkOperator op(two, layout, 1.0);
        CHECK(std::abs(coin_probability(op, layout, 0, 0, 0) - std::exp(-1.0)) <
              1e-12);
    }
    SECTION("beta = 0 accepts everything") {
        const ProblemSpec spec = make_nqueens(4);
        const RegisterLayout layout = spec.layout();
        const WalkOperator op(spec, layout, 0.0);
        Rng rng = make_rng(3, "coin-spot-checks");
        for (int i = 0; i < 20; ++i) {
            const std::uint64_t s = next_below(rng, spec.state_count());
            const std::uint64_t id = next_below(rng, spec.variables);
            const std::uint64_t v = next_below(rng, 2);
            CHECK(std::abs(coin_probability(op, layout, s, id, v) - 1.0) < 1e-12);
        }
    }
    SECTION("acceptance is non-increasing in beta for a fixed uphill move") {
        const ProblemSpec spec = make_ising_chain(3);
        const RegisterLayout layout = spec.layout();
        double previous = 1.0;
        for (double beta : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
            const WalkOperator op(spec, layout, beta);
            // 000 is a ground state; any move out of it is uphill.
            const double p = coin_probability(op, layout, 0b000, 0, 0);
            CHECK(p <= previous + 1e-12);
            previous = p;
        }
    }
    SECTION("angle quantization rounds the acceptance to 2^-a steps") {
        const ProblemSpec two(1, 1,
                              [](const std::vector<std::uint32_t>& v) {
                                  return v[0] == 0 ? 0.0 : 1.0;
                              },
                              "two-state");
        RegisterLayout layout = two.layout(2); // a = 2
        const WalkOperator op(two, layout, 1.0, build_cost_table(two),
                              ReflectionTarget::MoveCoin, 2);
        // A = e^-1 = 0.3679 rounds to 0.25 on a 4-level acceptance register.
        CHECK(std::abs(coin_probability(op, layout, 0, 0, 0) - 0.25) < 1e-12);
    }
}

TEST_CASE("flip operator F") {
    const ProblemSpec spec(2, 2, [](const auto&) { return 0.0; }, "p2q2");
    const RegisterLayout layout = spec.layout();
    const WalkOperator op(spec, layout, 1.0);

    SECTION("moves the state register exactly when the coin is 1") {
        // s = (2,3), move (variable 0, +1): encoded 14 -> 15.
        std::uint64_t with_coin = encode({2, 3}, spec);
        with_coin = layout.move_id().insert(with_coin, 0);
        with_coin = layout.move_value().insert(with_coin, 0);
        with_coin = layout.coin().insert(with_coin, 1);
        Statevector psi(layout.total_qubits());
        psi.set_basis_state(with_coin);
        op.apply_F(psi);
        std::uint64_t expected = encode({3, 3}, spec);
        expected = layout.move_id().insert(expected, 0);
        expected = layout.move_value().insert(expected, 0);
        expected = layout.coin().insert(expected, 1);
        CHECK(std::abs(psi[expected] - Complex{1.0, 0.0}) < 1e-15);
    }
    SECTION("coin 0 branch is the identity") {
        Statevector psi = random_state(layout.total_qubits(), 5);
        // Zero out every coin=1 amplitude, then renormalize.
        const std::uint64_t coin_bit = layout.coin().mask();
        double norm2 = 0.0;
        for (std::uint64_t i = 0; i < psi.dim(); ++i) {
            if (i & coin_bit) psi[i] = Complex{0.0, 0.0};
            norm2 += std::norm(psi[i]);
        }
        for (std::uint64_t i = 0; i < psi.dim(); ++i) {
            psi[i] /= std::sqrt(norm2);
        }
        const Statevector original = psi;
        op.apply_F(psi);
        CHECK(max_abs_diff(psi, original) == 0.0);
    }
    SECTION("permutation table agrees with apply_move exhaustively") {
        const auto perm = build_flip_permutation(layout, spec);
        const std::uint64_t state_mask = spec.state_count() - 1;
        for (std::uint64_t v = 0; v < perm.size(); ++v) {
            const std::uint64_t s = v & state_mask;
            const std::uint64_t id = (v >> spec.state_qubits()) &
                                     ((1ULL << layout.move_id_qubits()) - 1);
            const std::uint64_t value = v >> (spec.state_qubits() +
                                              layout.move_id_qubits());
            if (id >= spec.variables) {
                CHECK(perm[v] == v);
                continue;
            }
            const std::uint64_t expected =
                (v & ~state_mask) |
                apply_move_encoded(s, move_from_registers(id, value), spec);
            CHECK(perm[v] == expected);
        }
    }
    SECTION("F with the inverse move undoes F, exhaustively") {
        // Flipping the move-value bit negates the direction, so X on that
        // qubit conjugates F into its inverse.
        const std::uint32_t value_qubit = layout.move_value().first;
        Statevector psi = random_state(layout.total_qubits(), 9);
        const Statevector original = psi;
        op.apply_F(psi);
        apply_pauli_x(psi, value_qubit);
        op.apply_F(psi);
        apply_pauli_x(psi, value_qubit);
        CHECK(max_abs_diff(psi, original) < 1e-12);
    }
    SECTION("F adjoint F is the identity") {
        Statevector psi = random_state(layout.total_qubits(), 13);
        const Statevector original = psi;
        op.apply_F(psi);
        op.apply_F_adjoint(psi);
        CHECK(max_abs_diff(psi, original) < 1e-12);
    }
}

TEST_CASE("reflection R") {
    const ProblemSpec spec(2, 2, [](const auto&) { return 0.0; }, "p2q2");
    const RegisterLayout layout = spec.layout(1); // 8 qubits with one ancilla

    SECTION("signs: +1 on move+coin |0...0>, -1 elsewhere") {
        const WalkOperator op(spec, layout, 1.0);
        Statevector psi(layout.total_qubits());
        for (std::uint32_t q = 0; q < layout.total_qubits(); ++q) {
            apply_hadamard(psi, q);
        }
        const Statevector before = psi;
        op.apply_R(psi);
        const std::uint64_t mc_mask = layout.move().mask() | layout.coin().mask();
        for (std::uint64_t i = 0; i < psi.dim(); ++i) {
            const double sign = (i & mc_mask) ? -1.0 : 1.0;
            CHECK(std::abs(psi[i] - sign * before[i]) < 1e-15);
        }
    }
    SECTION("R squared is the identity") {
        const WalkOperator op(spec, layout, 1.0);
        Statevector psi = random_state(layout.total_qubits(), 31);
        const Statevector original = psi;
        op.apply_R(psi);
        op.apply_R(psi);
        CHECK(max_abs_diff(psi, original) < 1e-10);
    }
    SECTION("R commutes with operators on the state register") {
        const WalkOperator op(spec, layout, 1.0);
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            Statevector a = random_state(layout.total_qubits(), 50 + seed);
            Statevector b = a;
            apply_ry(a, 1, 0.9);
            apply_hadamard(a, 3);
            op.apply_R(a);
            op.apply_R(b);
            apply_ry(b, 1, 0.9);
            apply_hadamard(b, 3);
            CHECK(max_abs_diff(a, b) < 1e-12);
        }
    }
    SECTION("state+coin target reflects on the state register instead") {
        const WalkOperator op(spec, layout, 1.0, build_cost_table(spec),
                              ReflectionTarget::StateCoin);
        Statevector psi(layout.total_qubits());
        for (std::uint32_t q = 0; q < layout.total_qubits(); ++q) {
            apply_hadamard(psi, q);
        }
        const Statevector before = psi;
        op.apply_R(psi);
        const std::uint64_t sc_mask = layout.state().mask() | layout.coin().mask();
        for (std::uint64_t i = 0; i < psi.dim(); ++i) {
            const double sign = (i & sc_mask) ? -1.0 : 1.0;
            CHECK(std::abs(psi[i] - sign * before[i]) < 1e-15);
        }
    }
}

TEST_CASE("composed walk step") {
    SECTION("U adjoint U is the identity on dense columns (Ising n=3)") {
        const ProblemSpec spec = make_ising_chain(3);
        const WalkOperator op(spec, spec.layout(), 1.0);
        CHECK(unitarity_defect(op, spec.layout().total_qubits()) < 1e-10);
    }
    SECTION("component sequence equals the composed step") {
        const ProblemSpec spec = make_ising_chain(3);
        const WalkOperator op(spec, spec.layout(), 1.3);
        Statevector a = random_state(spec.layout().total_qubits(), 77);
        Statevector b = a;
        op.apply(a);
        op.apply_V(b);
        op.apply_B(b);
        op.apply_F(b);
        op.apply_B_adjoint(b);
        op.apply_V_adjoint(b);
        op.apply_R(b);
        CHECK(max_abs_diff(a, b) < 1e-10);
    }
    SECTION("beta = 0 keeps the uniform state-register marginal") {
        const ProblemSpec spec = make_ising_chain(3);
        WalkConfig config;
        config.schedule = {ScheduleKind::Constant, 0.0, 0.0};
        config.steps = 1;
        const EvolveResult run = evolve(config, spec);
        const auto marginal =
            marginal_distribution(run.final_state, spec.layout().state());
        for (double p : marginal) {
            CHECK(std::abs(p - 1.0 / 8.0) < 1e-9);
        }
    }
}

TEST_CASE("evolution under a schedule") {
    const ProblemSpec spec = make_ising_chain(3);

    SECTION("zero steps reports the uniform ground mass") {
        WalkConfig config;
        config.steps = 0;
        const EvolveResult run = evolve(config, spec);
        REQUIRE(run.reports.size() == 1);
        CHECK(run.reports[0].t == 0);
        CHECK(std::abs(run.reports[0].ground_probability - 2.0 / 8.0) < 1e-12);
    }
    SECTION("one step at beta = 2 beats the uniform baseline") {
        WalkConfig config;
        config.schedule = {ScheduleKind::Constant, 2.0, 0.0};
        config.steps = 1;
        const EvolveResult run = evolve(config, spec);
        CHECK(run.reports[1].ground_probability > 0.25);
        // Regression fixture from the first verified run.
        CHECK(std::abs(run.reports[1].ground_probability - 0.49691943829955254) <
              1e-12);
    }
    SECTION("constant schedule uses beta0 for every step") {
        WalkConfig config;
        config.schedule = {ScheduleKind::Constant, 1.7, 0.0};
        config.steps = 5;
        const EvolveResult run = evolve(config, spec);
        for (const WalkStepReport& r : run.reports) {
            CHECK(r.beta == 1.7);
        }
    }
    SECTION("ten steps at beta = 2 exceed a one-half ground mass") {
        WalkConfig config;
        config.schedule = {ScheduleKind::Constant, 2.0, 0.0};
        config.steps = 10;
        const EvolveResult run = evolve(config, spec);
        double best = 0.0;
        for (const WalkStepReport& r : run.reports) {
            best = std::max(best, r.ground_probability);
        }
        CHECK(best > 0.5);
        // Regression fixture from the first verified run (peak at t = 5).
        CHECK(std::abs(best - 0.71801536564767676) < 1e-12);
    }
    SECTION("norm survives one hundred steps") {
        WalkConfig config;
        config.schedule = {ScheduleKind::Constant, 1.0, 0.0};
        config.steps = 100;
        const EvolveResult run = evolve(config, spec);
        CHECK(std::abs(run.final_state.norm() - 1.0) < 1e-9);
    }
    SECTION("capacity errors carry the sizes") {
        WalkConfig config;
        config.qubit_limit = 6;
        CHECK_THROWS_AS(evolve(config, spec), CapacityError);
    }
    SECTION("basis initial state") {
        WalkConfig config;
        config.steps = 0;
        config.initial_state = InitialState::Basis;
        config.initial_basis = 0; // a ground state of the chain
        const EvolveResult run = evolve(config, spec);
        CHECK(run.reports[0].ground_probability == 1.0);
    }
}

TEST_CASE("annealing schedules") {
    SECTION("constant") {
        const AnnealingSchedule s{ScheduleKind::Constant, 0.8, 0.0};
        for (std::uint64_t t = 0; t < 20; ++t) CHECK(s.beta(t) == 0.8);
    }
    SECTION("linear steps by the slope") {
        const AnnealingSchedule s{ScheduleKind::Linear, 1.0, 0.25};
        for (std::uint64_t t = 0; t < 20; ++t) {
            CHECK(std::abs((s.beta(t + 1) - s.beta(t)) - 0.25) < 1e-12);
        }
    }
    SECTION("linear clamps at zero") {
        const AnnealingSchedule s{ScheduleKind::Linear, 1.0, -0.5};
        CHECK(s.beta(10) == 0.0);
    }
    SECTION("geometric multiplies by the ratio") {
        const AnnealingSchedule s{ScheduleKind::Geometric, 2.0, 1.5};
        for (std::uint64_t t = 0; t < 20; ++t) {
            CHECK(std::abs(s.beta(t + 1) / s.beta(t) - 1.5) < 1e-12);
        }
    }
    SECTION("exponential follows beta0 e^(rate t)") {
        const AnnealingSchedule s{ScheduleKind::Exponential, 0.5, 0.3};
        for (std::uint64_t t = 0; t < 10; ++t) {
            CHECK(std::abs(s.beta(t) - 0.5 * std::exp(0.3 * t)) < 1e-12);
        }
    }
}
