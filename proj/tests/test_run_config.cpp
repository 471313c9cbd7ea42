#include <catch2/catch_amalgamated.hpp>

#include "qmh/run_config.hpp"

using namespace qmh;

TEST_CASE("run config JSON round trip") {
    RunConfig config;
    config.subcommand = "compare";
    config.problem = "nqueens";
    config.n = 5;
    config.sizes = {3, 4, 5};
    config.schedule = "geometric";
    config.beta0 = 2.5;
    config.schedule_parameter = 0.9;
    config.steps = 17;
    config.delta = 0.85;
    config.t_max = 33;
    config.shots = 2048;
    config.seed = 424242;
    config.out = "curves.csv";
    config.qbird.lower = {0.0, -1.0};
    config.qbird.upper = {4.0, 1.0};
    config.qbird.truth = {2.0, 0.25};
    config.qbird.widths = {0.5, 0.125};
    config.qbird.initial_qubits = 4;

    const RunConfig loaded = run_config_from_json(to_json(config));
    CHECK(loaded.subcommand == config.subcommand);
    CHECK(loaded.problem == config.problem);
    CHECK(loaded.n == config.n);
    CHECK(loaded.sizes == config.sizes);
    CHECK(loaded.schedule == config.schedule);
    CHECK(loaded.beta0 == config.beta0);
    CHECK(loaded.schedule_parameter == config.schedule_parameter);
    CHECK(loaded.steps == config.steps);
    CHECK(loaded.delta == config.delta);
    CHECK(loaded.t_max == config.t_max);
    CHECK(loaded.shots == config.shots);
    CHECK(loaded.seed == config.seed);
    CHECK(loaded.out == config.out);
    CHECK(loaded.qbird.lower == config.qbird.lower);
    CHECK(loaded.qbird.upper == config.qbird.upper);
    CHECK(loaded.qbird.truth == config.qbird.truth);
    CHECK(loaded.qbird.widths == config.qbird.widths);
    CHECK(loaded.qbird.initial_qubits == config.qbird.initial_qubits);
}

TEST_CASE("unknown config keys are rejected by name") {
    nlohmann::json j{{"subcommand", "solve"}, {"gamma", 1.0}};
    CHECK_THROWS_WITH(run_config_from_json(j),
                      Catch::Matchers::ContainsSubstring("gamma"));

    nlohmann::json nested{{"subcommand", "qbird"},
                          {"qbird", {{"lower", {0.0}}, {"sigma", 1.0}}}};
    CHECK_THROWS_WITH(run_config_from_json(nested),
                      Catch::Matchers::ContainsSubstring("sigma"));
}

TEST_CASE("wrongly typed config fields are rejected") {
    nlohmann::json j{{"seed", "not-a-number"}};
    CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
}

TEST_CASE("metadata sidecars load as configs") {
    RunConfig config;
    config.subcommand = "grover-check";
    config.n = 3;
    config.marked = 5;
    config.iterations = 2;
    const nlohmann::json sidecar = build_metadata(config, {"out.csv"});
    CHECK(sidecar.contains("config"));
    CHECK(sidecar.at("rng") == kRngAlgorithm);

    const RunConfig loaded = run_config_from_json(sidecar);
    CHECK(loaded.subcommand == "grover-check");
    CHECK(loaded.n == 3);
    CHECK(loaded.marked == 5);
    CHECK(loaded.iterations == 2);
}

TEST_CASE("schedule and reflection parsing") {
    RunConfig config;
    config.schedule = "linear";
    config.beta0 = 1.0;
    config.schedule_parameter = 0.5;
    CHECK(config.annealing_schedule().kind == ScheduleKind::Linear);
    CHECK(config.annealing_schedule().beta(2) == 2.0);

    config.schedule = "sawtooth";
    CHECK_THROWS_AS(config.annealing_schedule(), std::invalid_argument);

    config.reflection_target = "state+coin";
    CHECK(config.reflection() == ReflectionTarget::StateCoin);
    config.reflection_target = "coin";
    CHECK_THROWS_AS(config.reflection(), ConfigError);
}

TEST_CASE("qbird setup from the CLI fields") {
    RunConfig config;
    config.seed = 5;
    config.shots = 99;
    config.qbird.lower = {0.0};
    config.qbird.upper = {4.0};
    config.qbird.truth = {2.0};
    config.qbird.widths = {0.5};
    config.qbird.initial_qubits = 3;
    config.qbird.outer_iterations = 2;

    const auto [qconfig, cost] = qbird_setup(config);
    CHECK(qconfig.priors.size() == 1);
    CHECK(qconfig.priors[0].lower == 0.0);
    CHECK(qconfig.priors[0].upper == 4.0);
    CHECK(qconfig.shots == 99);
    CHECK(qconfig.seed == 5);
    CHECK(cost({2.0}) == 0.0);
    CHECK(std::abs(cost({2.5}) - 0.5) < 1e-15);

    SECTION("mismatched sizes are config errors") {
        RunConfig bad = config;
        bad.qbird.truth = {2.0, 1.0};
        CHECK_THROWS_AS(qbird_setup(bad), ConfigError);
        bad = config;
        bad.qbird.upper.clear();
        CHECK_THROWS_AS(qbird_setup(bad), ConfigError);
    }
    SECTION("gaussian priors need their parameters") {
        RunConfig gauss = config;
        gauss.qbird.shape = {"gaussian"};
        CHECK_THROWS_AS(qbird_setup(gauss), ConfigError);
        gauss.qbird.prior_mean = {2.0};
        gauss.qbird.prior_sigma = {1.0};
        const auto [qc, fn] = qbird_setup(gauss);
        CHECK(qc.priors[0].shape == Prior::Shape::Gaussian);
        CHECK(qc.priors[0].mean == 2.0);
    }
}
