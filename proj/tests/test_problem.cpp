#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "qmh/problem.hpp"

using namespace qmh;

namespace {

/// Independent N-Queens solution counter: permutations of columns (rows and
/// columns distinct by construction) filtered by diagonal clashes.
std::uint64_t count_solutions_by_permutation(std::uint32_t n) {
    std::vector<std::uint32_t> columns(n);
    std::iota(columns.begin(), columns.end(), 0u);
    std::uint64_t count = 0;
    do {
        bool ok = true;
        for (std::uint32_t i = 0; i < n && ok; ++i) {
            for (std::uint32_t j = i + 1; j < n && ok; ++j) {
                const std::int64_t dc = static_cast<std::int64_t>(columns[i]) -
                                        static_cast<std::int64_t>(columns[j]);
                if (std::llabs(dc) == j - i) ok = false;
            }
        }
        if (ok) ++count;
    } while (std::next_permutation(columns.begin(), columns.end()));
    return count;
}

ProblemSpec two_state_problem() {
    return ProblemSpec(
        1, 1,
        [](const std::vector<std::uint32_t>& v) { return v[0] == 0 ? 0.0 : 1.0; },
        "two-state");
}

} // namespace

TEST_CASE("state packing round trip") {
    const ProblemSpec spec(2, 2, [](const auto&) { return 0.0; }, "probe");
    CHECK(encode({2, 3}, spec) == 14); // binary 1110, variable 0 in the low bits

    for (std::uint64_t s = 0; s < spec.state_count(); ++s) {
        CHECK(encode(decode(s, spec), spec) == s);
    }

    CHECK_THROWS_AS(encode({4, 0}, spec), std::invalid_argument);
    CHECK_THROWS_AS(encode({0}, spec), std::invalid_argument);
}

TEST_CASE("moves increment modulo the variable range") {
    const ProblemSpec spec(2, 2, [](const auto&) { return 0.0; }, "probe");
    CHECK(apply_move({2, 3}, {0, +1}, spec) == std::vector<std::uint32_t>{3, 3});
    CHECK(apply_move({3, 3}, {0, +1}, spec) == std::vector<std::uint32_t>{0, 3});
    CHECK(apply_move({0, 1}, {1, -1}, spec) == std::vector<std::uint32_t>{0, 0});

    SECTION("move then inverse move is the identity, exhaustively") {
        for (std::uint64_t s = 0; s < spec.state_count(); ++s) {
            for (const Move& m : all_moves(spec)) {
                const auto forth = apply_move(decode(s, spec), m, spec);
                CHECK(apply_move(forth, inverse(m), spec) == decode(s, spec));
            }
        }
    }
    SECTION("encoded fast path agrees with the value-vector path") {
        for (std::uint64_t s = 0; s < spec.state_count(); ++s) {
            for (const Move& m : all_moves(spec)) {
                CHECK(apply_move_encoded(s, m, spec) ==
                      encode(apply_move(decode(s, spec), m, spec), spec));
            }
        }
    }
}

TEST_CASE("every move is a permutation of the state set") {
    const auto check_bijective = [](const ProblemSpec& spec) {
        for (const Move& m : all_moves(spec)) {
            std::vector<bool> hit(spec.state_count(), false);
            for (std::uint64_t s = 0; s < spec.state_count(); ++s) {
                const std::uint64_t target = apply_move_encoded(s, m, spec);
                REQUIRE_FALSE(hit[target]);
                hit[target] = true;
            }
        }
    };
    check_bijective(make_ising_chain(4));
    check_bijective(make_nqueens(4));
    check_bijective(ProblemSpec(3, 3, [](const auto&) { return 0.0; }, "p3q3"));
    check_bijective(ProblemSpec(4, 3, [](const auto&) { return 0.0; }, "p4q3"));
}

TEST_CASE("the canonical move order covers all 2P moves") {
    const ProblemSpec spec(3, 2, [](const auto&) { return 0.0; }, "probe");
    const auto moves = all_moves(spec);
    REQUIRE(moves.size() == 6);
    std::unordered_set<std::uint64_t> seen;
    for (const Move& m : moves) {
        seen.insert(m.variable * 2 + (m.direction > 0 ? 0 : 1));
        CHECK((m.direction == 1 || m.direction == -1));
    }
    CHECK(seen.size() == 6);
    // Register encoding convention: value bit 0 is +1, bit 1 is -1.
    CHECK(move_from_registers(2, 0).variable == 2);
    CHECK(move_from_registers(2, 0).direction == +1);
    CHECK(move_from_registers(2, 1).direction == -1);
}

TEST_CASE("nqueens cost") {
    CHECK(nqueens_cost({1, 3, 0, 2}, 4) == 0.0);
    CHECK(nqueens_cost({0, 0, 0, 0}, 4) == 6.0); // C(4,2) same-column pairs
    CHECK(nqueens_cost({0, 1, 2, 3}, 4) == 6.0); // one long diagonal
    CHECK(nqueens_cost({5, 0, 1, 3}, 4) == 4.0 + 1.0); // off-board plus one attack

    SECTION("n=4 has exactly two zero-cost placements") {
        const GroundSet ground = brute_force_ground(make_nqueens(4));
        CHECK(ground.min_cost == 0.0);
        CHECK(ground.states.size() == 2);
        CHECK(ground.states.size() == count_solutions_by_permutation(4));
    }
    SECTION("solution counts match the permutation counter for n=5,6") {
        for (std::uint32_t n : {5u, 6u}) {
            const GroundSet ground = brute_force_ground(make_nqueens(n));
            CHECK(ground.min_cost == 0.0);
            CHECK(ground.states.size() == count_solutions_by_permutation(n));
        }
        CHECK(brute_force_ground(make_nqueens(5)).states.size() == 10);
    }
}

TEST_CASE("ising chain cost") {
    CHECK(ising_chain_cost({1, 1, 1, 1}) == -3.0);
    CHECK(ising_chain_cost({1, 0, 1, 0}) == 3.0);

    const GroundSet ground = brute_force_ground(make_ising_chain(4));
    CHECK(ground.min_cost == -3.0);
    CHECK(ground.states == std::vector<std::uint64_t>{0, 15});
}

TEST_CASE("gaussian log-likelihood cost") {
    const std::vector<ParameterGrid> grids{{0.0, 4.0, 4}, {0.0, 4.0, 4}};
    const std::vector<double> truth{grids[0].value(5), grids[1].value(9)};
    const ProblemSpec spec = make_gaussian_loglike(grids, truth, {0.5, 0.5});

    CHECK(spec.cost({5, 9}) == 0.0);

    // One parameter exactly one width away from the truth.
    const double width = grids[0].cell_width();
    const ProblemSpec unit =
        make_gaussian_loglike(grids, {grids[0].value(5) + width * 2.0, truth[1]},
                              {width * 2.0, 0.5});
    CHECK(std::abs(unit.cost({5, 9}) - 0.5) < 1e-12);

    SECTION("brute-force argmin sits on the grid point nearest the truth") {
        const GroundSet ground = brute_force_ground(spec);
        REQUIRE(ground.states.size() == 1);
        const auto values = decode(ground.states[0], spec);
        CHECK(values[0] == 5);
        CHECK(values[1] == 9);
    }
    SECTION("cost evaluation is deterministic") {
        const double a = spec.cost({3, 11});
        const double b = spec.cost({3, 11});
        CHECK(a == b);
    }
}

TEST_CASE("parameter grid affine map") {
    const ParameterGrid grid{0.0, 4.0, 2};
    CHECK(grid.value(0) == 0.5);
    CHECK(grid.value(1) == 1.5);
    CHECK(grid.value(2) == 2.5);
    CHECK(grid.value(3) == 3.5);
    // value -> index -> value lands within half a cell of the input.
    for (double v : {0.0, 0.49, 1.0, 2.2, 3.99}) {
        CHECK(std::abs(grid.value(grid.index(v)) - v) <= grid.cell_width() / 2 + 1e-12);
    }
    CHECK(grid.index(-3.0) == 0);
    CHECK(grid.index(99.0) == 3);
}

TEST_CASE("brute force respects the capacity limit") {
    const ProblemSpec big(13, 2, [](const auto&) { return 0.0; }, "too-big");
    CHECK_THROWS_AS(brute_force_ground(big), CapacityError);
    CHECK_THROWS_AS(boltzmann(big, 1.0), CapacityError);
}

TEST_CASE("boltzmann tables") {
    SECTION("beta = 0 is uniform") {
        const BoltzmannTable table = boltzmann(make_ising_chain(4), 0.0);
        for (double p : table.probabilities) {
            CHECK(std::abs(p - 1.0 / 16.0) < 1e-15);
        }
    }
    SECTION("two-state problem at beta = ln 2") {
        const BoltzmannTable table = boltzmann(two_state_problem(), std::log(2.0));
        CHECK(std::abs(table.probabilities[0] - 2.0 / 3.0) < 1e-12);
        CHECK(std::abs(table.probabilities[1] - 1.0 / 3.0) < 1e-12);
    }
    SECTION("large beta concentrates on the degenerate ground pair") {
        const BoltzmannTable table = boltzmann(make_ising_chain(4), 50.0);
        CHECK(std::abs(table.probabilities[0] - 0.5) < 1e-12);
        CHECK(std::abs(table.probabilities[15] - 0.5) < 1e-12);
    }
    SECTION("invariant under adding a constant to all costs") {
        const ProblemSpec base = make_ising_chain(4);
        const ProblemSpec shifted(
            base.variables, base.qubits_per_variable,
            [&base](const std::vector<std::uint32_t>& v) {
                return base.cost(v) + 123.75;
            },
            "shifted");
        const BoltzmannTable a = boltzmann(base, 1.3);
        const BoltzmannTable b = boltzmann(shifted, 1.3);
        for (std::size_t i = 0; i < a.probabilities.size(); ++i) {
            CHECK(std::abs(a.probabilities[i] - b.probabilities[i]) < 1e-12);
        }
    }
}

TEST_CASE("metropolis acceptance") {
    CHECK(acceptance_probability(0.0, 5.0) == 1.0);
    CHECK(acceptance_probability(2.0, -1.0) == 1.0);
    CHECK(std::abs(acceptance_probability(1.0, 1.0) - std::exp(-1.0)) < 1e-15);
    // Non-increasing in beta for a fixed uphill move.
    double previous = 1.0;
    for (double beta = 0.0; beta <= 4.0; beta += 0.25) {
        const double a = acceptance_probability(beta, 0.7);
        CHECK(a <= previous + 1e-15);
        previous = a;
    }
}
