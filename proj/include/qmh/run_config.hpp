#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmh/io.hpp"
#include "qmh/qbird.hpp"
#include "qmh/schedule.hpp"
#include "qmh/tts.hpp"
#include "qmh/walk.hpp"

namespace qmh {

/// Raised on malformed configs; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QBirdRunConfig {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> shape; // "uniform" | "gaussian"; empty = uniform
    std::vector<double> prior_mean;
    std::vector<double> prior_sigma;
    std::vector<double> truth;
    std::vector<double> widths;
    std::uint32_t initial_qubits = 3;
    std::uint64_t walk_steps = 4;
    std::uint32_t outer_iterations = 1;
    double interval_factor = 2.0;
};

/// Everything a run needs; fully serializable so that the metadata sidecar
/// alone reproduces a run.
struct RunConfig {
    std::string subcommand; // solve | compare | qbird | exponent | grover-check
    std::string problem = "ising";
    std::uint32_t n = 4;
    std::vector<std::uint32_t> sizes;
    std::string schedule = "constant";
    double beta0 = 1.0;
    double schedule_parameter = 0.0;
    std::uint64_t steps = 8;
    double delta = 0.9;
    std::uint64_t t_max = 40;
    std::uint64_t shots = 1024;
    std::uint64_t quantum_shots = 0;
    std::uint64_t chains = 20000;
    std::uint64_t seed = 0;
    std::uint32_t threads = 1;
    std::uint32_t qubit_limit = kDefaultQubitLimit;
    std::uint32_t acceptance_qubits = 0;
    std::string reflection_target = "move+coin"; // or "state+coin"
    std::string out;
    std::string summary_out;
    std::string metadata_out;
    std::string in;            // exponent input CSV
    std::uint64_t marked = 0;  // grover-check
    std::uint32_t iterations = 1;
    QBirdRunConfig qbird;

    AnnealingSchedule annealing_schedule() const {
        return {schedule_kind_from_string(schedule), beta0, schedule_parameter};
    }

    ReflectionTarget reflection() const {
        if (reflection_target == "move+coin") return ReflectionTarget::MoveCoin;
        if (reflection_target == "state+coin") return ReflectionTarget::StateCoin;
        throw ConfigError("reflection_target must be move+coin or state+coin, got " +
                          reflection_target);
    }
};

namespace detail {

inline void require_known_keys(const nlohmann::json& j,
                               const std::set<std::string>& known,
                               const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw ConfigError("unknown config key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
inline void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("config field \"") + key +
                              "\" has the wrong type");
        }
    }
}

} // namespace detail

inline nlohmann::json to_json(const QBirdRunConfig& q) {
    return nlohmann::json{{"lower", q.lower},
                          {"upper", q.upper},
                          {"shape", q.shape},
                          {"prior_mean", q.prior_mean},
                          {"prior_sigma", q.prior_sigma},
                          {"truth", q.truth},
                          {"widths", q.widths},
                          {"initial_qubits", q.initial_qubits},
                          {"walk_steps", q.walk_steps},
                          {"outer_iterations", q.outer_iterations},
                          {"interval_factor", q.interval_factor}};
}

inline nlohmann::json to_json(const RunConfig& c) {
    return nlohmann::json{{"subcommand", c.subcommand},
                          {"problem", c.problem},
                          {"n", c.n},
                          {"sizes", c.sizes},
                          {"schedule", c.schedule},
                          {"beta0", c.beta0},
                          {"schedule_parameter", c.schedule_parameter},
                          {"steps", c.steps},
                          {"delta", c.delta},
                          {"t_max", c.t_max},
                          {"shots", c.shots},
                          {"quantum_shots", c.quantum_shots},
                          {"chains", c.chains},
                          {"seed", c.seed},
                          {"threads", c.threads},
                          {"qubit_limit", c.qubit_limit},
                          {"acceptance_qubits", c.acceptance_qubits},
                          {"reflection_target", c.reflection_target},
                          {"out", c.out},
                          {"summary_out", c.summary_out},
                          {"metadata_out", c.metadata_out},
                          {"in", c.in},
                          {"marked", c.marked},
                          {"iterations", c.iterations},
                          {"qbird", to_json(c.qbird)}};
}

inline QBirdRunConfig qbird_config_from_json(const nlohmann::json& j) {
    detail::require_known_keys(
        j,
        {"lower", "upper", "shape", "prior_mean", "prior_sigma", "truth",
         "widths", "initial_qubits", "walk_steps", "outer_iterations",
         "interval_factor"},
        "qbird");
    QBirdRunConfig q;
    detail::read_if(j, "lower", q.lower);
    detail::read_if(j, "upper", q.upper);
    detail::read_if(j, "shape", q.shape);
    detail::read_if(j, "prior_mean", q.prior_mean);
    detail::read_if(j, "prior_sigma", q.prior_sigma);
    detail::read_if(j, "truth", q.truth);
    detail::read_if(j, "widths", q.widths);
    detail::read_if(j, "initial_qubits", q.initial_qubits);
    detail::read_if(j, "walk_steps", q.walk_steps);
    detail::read_if(j, "outer_iterations", q.outer_iterations);
    detail::read_if(j, "interval_factor", q.interval_factor);
    return q;
}

/// Parses a config object. Accepts either the bare config or a metadata
/// sidecar (an object with a "config" member). Unknown keys are rejected.
inline RunConfig run_config_from_json(const nlohmann::json& root) {
    const nlohmann::json& j = root.contains("config") ? root.at("config") : root;
    detail::require_known_keys(
        j,
        {"subcommand",      "problem",        "n",
         "sizes",           "schedule",       "beta0",
         "schedule_parameter", "steps",       "delta",
         "t_max",           "shots",          "quantum_shots",
         "chains",          "seed",           "threads",
         "qubit_limit",     "acceptance_qubits", "reflection_target",
         "out",             "summary_out",    "metadata_out",
         "in",              "marked",         "iterations",
         "qbird"},
        "config");
    RunConfig c;
    detail::read_if(j, "subcommand", c.subcommand);
    detail::read_if(j, "problem", c.problem);
    detail::read_if(j, "n", c.n);
    detail::read_if(j, "sizes", c.sizes);
    detail::read_if(j, "schedule", c.schedule);
    detail::read_if(j, "beta0", c.beta0);
    detail::read_if(j, "schedule_parameter", c.schedule_parameter);
    detail::read_if(j, "steps", c.steps);
    detail::read_if(j, "delta", c.delta);
    detail::read_if(j, "t_max", c.t_max);
    detail::read_if(j, "shots", c.shots);
    detail::read_if(j, "quantum_shots", c.quantum_shots);
    detail::read_if(j, "chains", c.chains);
    detail::read_if(j, "seed", c.seed);
    detail::read_if(j, "threads", c.threads);
    detail::read_if(j, "qubit_limit", c.qubit_limit);
    detail::read_if(j, "acceptance_qubits", c.acceptance_qubits);
    detail::read_if(j, "reflection_target", c.reflection_target);
    detail::read_if(j, "out", c.out);
    detail::read_if(j, "summary_out", c.summary_out);
    detail::read_if(j, "metadata_out", c.metadata_out);
    detail::read_if(j, "in", c.in);
    detail::read_if(j, "marked", c.marked);
    detail::read_if(j, "iterations", c.iterations);
    if (j.contains("qbird")) {
        c.qbird = qbird_config_from_json(j.at("qbird"));
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse config " + path + ": " + e.what());
    }
    return run_config_from_json(j);
}

/// Metadata sidecar: the full effective config plus reproducibility context.
inline nlohmann::json build_metadata(const RunConfig& config,
                                     const std::vector<std::string>& outputs) {
    return nlohmann::json{
        {"config", to_json(config)},
        {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
        {"rng", kRngAlgorithm},
        {"timestamp", now_iso8601_utc()},
        {"qubit_limit", config.qubit_limit},
        {"sample_weighting", "equal-per-iteration"},
        {"outputs", outputs}};
}

/// Builds the qBIRD library config plus the toy cost function from the CLI
/// fields; truth/widths define the injected Gaussian log-likelihood.
inline std::pair<QBirdConfig, CostFn> qbird_setup(const RunConfig& c) {
    const QBirdRunConfig& q = c.qbird;
    const std::size_t p = q.lower.size();
    if (p == 0 || q.upper.size() != p) {
        throw ConfigError("qbird: lower/upper prior bounds required, one per parameter");
    }
    if (q.truth.size() != p || q.widths.size() != p) {
        throw ConfigError("qbird: truth and widths must match the parameter count");
    }
    QBirdConfig config;
    for (std::size_t k = 0; k < p; ++k) {
        Prior prior;
        prior.lower = q.lower[k];
        prior.upper = q.upper[k];
        const std::string shape = k < q.shape.size() ? q.shape[k] : "uniform";
        if (shape == "uniform") {
            prior.shape = Prior::Shape::Uniform;
        } else if (shape == "gaussian") {
            prior.shape = Prior::Shape::Gaussian;
            if (k >= q.prior_mean.size() || k >= q.prior_sigma.size()) {
                throw ConfigError("qbird: gaussian prior needs prior_mean and prior_sigma");
            }
            prior.mean = q.prior_mean[k];
            prior.sigma = q.prior_sigma[k];
        } else {
            throw ConfigError("qbird: unknown prior shape \"" + shape + "\"");
        }
        config.priors.push_back(prior);
    }
    config.initial_qubits = q.initial_qubits;
    config.walk_steps = q.walk_steps;
    config.outer_iterations = q.outer_iterations;
    config.shots = c.shots;
    config.interval_factor = q.interval_factor;
    config.schedule = c.annealing_schedule();
    config.seed = c.seed;
    config.qubit_limit = c.qubit_limit;
    return {config, gaussian_cost(q.truth, q.widths)};
}

/// Per-iteration statistics and convergence flag for the qbird summary file.
inline nlohmann::json inference_summary_json(const QBirdConfig& config,
                                             const PosteriorResult& result) {
    nlohmann::json iterations = nlohmann::json::array();
    for (std::size_t i = 0; i < result.iteration_means.size(); ++i) {
        iterations.push_back({{"iteration", i},
                              {"mean", result.iteration_means[i]},
                              {"std", result.iteration_stds[i]}});
    }
    nlohmann::json grids = nlohmann::json::array();
    for (const ParameterGrid& g : result.final_grids) {
        grids.push_back(
            {{"lower", g.lower}, {"upper", g.upper}, {"qubits", g.qubits}});
    }
    return nlohmann::json{{"iterations", iterations},
                          {"final_grids", grids},
                          {"start_values", result.start_values},
                          {"converged", result.converged},
                          {"seed", config.seed},
                          {"rng", kRngAlgorithm},
                          {"sample_weighting", "equal-per-iteration"}};
}

} // namespace qmh
