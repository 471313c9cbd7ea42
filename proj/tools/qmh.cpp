// Command-line front end: solve single problems with the quantum walk,
// compare classical and quantum success curves via TTS, run the qBIRD
// inference loop, refit scaling exponents from emitted CSV files, and run
// the Grover self-check. Every run can emit a metadata sidecar that
// reproduces it exactly.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmh/classical.hpp"
#include "qmh/io.hpp"
#include "qmh/problem.hpp"
#include "qmh/qbird.hpp"
#include "qmh/run_config.hpp"
#include "qmh/statevector.hpp"
#include "qmh/tts.hpp"
#include "qmh/walk.hpp"

namespace {

using qmh::RunConfig;

std::string join_values(const std::vector<std::uint32_t>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        out << values[i];
    }
    return out.str();
}

/// Relative output paths are placed under $QMH_OUT_DIR when it is set.
std::string resolve_output(const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    const char* dir = std::getenv("QMH_OUT_DIR");
    if (!dir || !*dir) return path;
    return (std::filesystem::path(dir) / path).string();
}

void write_metadata_sidecar(const RunConfig& cfg,
                            const std::vector<std::string>& outputs) {
    std::string path = cfg.metadata_out;
    if (path.empty() && !cfg.out.empty()) path = cfg.out + ".meta.json";
    if (path.empty()) return;
    qmh::write_text_file(resolve_output(path),
                         qmh::build_metadata(cfg, outputs).dump(2) + "\n");
}

int run_solve(const RunConfig& cfg) {
    const qmh::ProblemSpec spec = qmh::make_problem(cfg.problem, cfg.n);
    qmh::WalkConfig walk;
    walk.schedule = cfg.annealing_schedule();
    walk.steps = cfg.steps;
    walk.acceptance_qubits = cfg.acceptance_qubits;
    walk.reflection_target = cfg.reflection();
    walk.qubit_limit = cfg.qubit_limit;

    const qmh::EvolveResult run = qmh::evolve(walk, spec);
    qmh::Rng rng = qmh::make_rng(cfg.seed, "solve-sample");
    const std::vector<std::uint64_t> draws =
        qmh::sample(run.final_state, spec.layout().state(), cfg.shots, rng);

    std::uint64_t best_state = draws[0];
    double best_cost = spec.cost(qmh::decode(best_state, spec));
    for (std::uint64_t d : draws) {
        const double c = spec.cost(qmh::decode(d, spec));
        if (c < best_cost || (c == best_cost && d < best_state)) {
            best_cost = c;
            best_state = d;
        }
    }
    std::cout << "problem " << spec.label << " steps " << cfg.steps
              << " ground-probability "
              << qmh::format_double(run.reports.back().ground_probability) << "\n"
              << "best " << join_values(qmh::decode(best_state, spec)) << " cost "
              << qmh::format_double(best_cost) << "\n";
    write_metadata_sidecar(cfg, {});
    return 0;
}

int run_compare(const RunConfig& cfg) {
    if (cfg.out.empty()) {
        throw qmh::ConfigError("compare: --out CSV path is required");
    }
    qmh::CompareConfig cc;
    cc.problem = cfg.problem;
    cc.sizes = cfg.sizes;
    cc.schedule = cfg.annealing_schedule();
    cc.delta = cfg.delta;
    cc.t_max = cfg.t_max;
    cc.seed = cfg.seed;
    cc.quantum_shots = cfg.quantum_shots;
    cc.fallback_chains = cfg.chains;
    cc.acceptance_qubits = cfg.acceptance_qubits;
    cc.reflection_target = cfg.reflection();
    cc.qubit_limit = cfg.qubit_limit;
    cc.threads = cfg.threads;

    const qmh::CompareResult result = qmh::compare(cc);
    qmh::write_text_file(resolve_output(cfg.out), qmh::tts_csv(result.records));
    write_metadata_sidecar(cfg, {cfg.out});

    for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
    for (const qmh::MinTtsPair& pair : result.pairs) {
        std::cout << "size " << pair.size << " classical-tts "
                  << qmh::format_double(pair.classical_tts) << " quantum-tts "
                  << qmh::format_double(pair.quantum_tts) << "\n";
    }
    if (result.fit) {
        std::cout << "exponent " << qmh::format_double(result.fit->exponent)
                  << " intercept " << qmh::format_double(result.fit->intercept)
                  << " points " << result.fit->points << "\n";
    }
    return 0;
}

int run_qbird(const RunConfig& cfg) {
    if (cfg.out.empty()) {
        throw qmh::ConfigError("qbird: --out corner CSV path is required");
    }
    const auto [config, cost_fn] = qmh::qbird_setup(cfg);
    const qmh::PosteriorResult result = qmh::run_inference(config, cost_fn);

    std::vector<std::string> outputs{cfg.out};
    qmh::write_text_file(resolve_output(cfg.out), qmh::corner_csv(result));
    std::string summary_path = cfg.summary_out;
    if (summary_path.empty()) summary_path = cfg.out + ".summary.json";
    qmh::write_text_file(resolve_output(summary_path),
                         qmh::inference_summary_json(config, result).dump(2) + "\n");
    outputs.push_back(summary_path);
    write_metadata_sidecar(cfg, outputs);

    std::cout << "converged " << (result.converged ? "true" : "false");
    if (!result.iteration_means.empty()) {
        std::cout << " mean";
        for (double m : result.iteration_means.back()) {
            std::cout << ' ' << qmh::format_double(m);
        }
    }
    std::cout << "\n";
    return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

int run_exponent(const RunConfig& cfg) {
    if (cfg.in.empty()) {
        throw qmh::ConfigError("exponent: --in CSV path is required");
    }
    std::istringstream in(qmh::read_text_file(cfg.in));
    std::string line;
    if (!std::getline(in, line) || line != qmh::kTtsCsvHeader) {
        throw qmh::ConfigError("exponent: " + cfg.in +
                               " does not start with the TTS CSV header");
    }
    // (problem, n) -> algorithm -> minimum finite TTS
    std::map<std::pair<std::string, std::string>, std::map<std::string, double>> best;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 12) {
            throw qmh::ConfigError("exponent: malformed CSV row: " + line);
        }
        const double tts = std::strtod(f[9].c_str(), nullptr);
        if (!std::isfinite(tts)) continue;
        auto& per_algorithm = best[{f[0], f[1]}];
        const auto it = per_algorithm.find(f[4]);
        if (it == per_algorithm.end() || tts < it->second) {
            per_algorithm[f[4]] = tts;
        }
    }
    std::vector<std::pair<double, double>> points;
    for (const auto& [group, per_algorithm] : best) {
        const auto c = per_algorithm.find("classical");
        const auto q = per_algorithm.find("quantum");
        if (c != per_algorithm.end() && q != per_algorithm.end()) {
            points.push_back({c->second, q->second});
        }
    }
    const qmh::ExponentFit fit = qmh::fit_exponent(points);
    std::cout << qmh::format_double(fit.exponent) << "\n";
    return 0;
}

int run_grover_check(const RunConfig& cfg) {
    const double p =
        qmh::grover_search(cfg.n, cfg.marked, cfg.iterations, cfg.qubit_limit);
    std::cout << "n " << cfg.n << " marked " << cfg.marked << " iterations "
              << cfg.iterations << " p " << qmh::format_double(p) << "\n";
    return 0;
}

int run_cli(int argc, char** argv) {
    RunConfig cfg;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            cfg = qmh::load_run_config(argv[i + 1]);
        }
    }

    CLI::App app{"quantum Metropolis-Hastings walk laboratory"};
    app.require_subcommand(0, 1);
    std::string config_path;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path,
                        "JSON config file or metadata sidecar");
        sub->add_option("--seed", cfg.seed, "root RNG seed");
        sub->add_option("--qubit-limit", cfg.qubit_limit, "simulator qubit ceiling");
        sub->add_option("--metadata-out", cfg.metadata_out, "metadata sidecar path");
    };
    const auto add_schedule = [&](CLI::App* sub) {
        sub->add_option("--schedule", cfg.schedule,
                        "constant | linear | geometric | exponential");
        sub->add_option("--beta", cfg.beta0, "initial inverse temperature");
        sub->add_option("--schedule-parameter", cfg.schedule_parameter,
                        "slope / ratio / rate of the schedule");
    };

    app.add_option("--config", config_path,
                   "JSON config file or metadata sidecar (dispatches by its subcommand)");

    CLI::App* solve = app.add_subcommand("solve", "run the walk on one problem");
    add_common(solve);
    add_schedule(solve);
    solve->add_option("--problem", cfg.problem, "ising | nqueens");
    solve->add_option("--n", cfg.n, "problem size");
    solve->add_option("--steps", cfg.steps, "walk steps");
    solve->add_option("--shots", cfg.shots, "samples of the final state");
    solve->add_option("--acceptance-qubits", cfg.acceptance_qubits,
                      "coin angle quantization bits");
    solve->add_option("--reflection-target", cfg.reflection_target,
                      "move+coin | state+coin");

    CLI::App* compare = app.add_subcommand(
        "compare", "classical vs quantum TTS sweep over problem sizes");
    add_common(compare);
    add_schedule(compare);
    compare->add_option("--problem", cfg.problem, "ising | nqueens");
    compare->add_option("--sizes", cfg.sizes, "problem sizes")->delimiter(',');
    compare->add_option("--delta", cfg.delta, "target confidence");
    compare->add_option("--t-max", cfg.t_max, "maximum step count");
    compare->add_option("--quantum-shots", cfg.quantum_shots,
                        "0 = exact marginal, > 0 = sampled estimation");
    compare->add_option("--chains", cfg.chains,
                        "chains when the exact classical path is over capacity");
    compare->add_option("--threads", cfg.threads, "worker cap for sampled chains");
    compare->add_option("--acceptance-qubits", cfg.acceptance_qubits,
                        "coin angle quantization bits");
    compare->add_option("--reflection-target", cfg.reflection_target,
                        "move+coin | state+coin");
    compare->add_option("--out", cfg.out, "TTS CSV output path");

    CLI::App* qbird = app.add_subcommand(
        "qbird", "renormalization-and-downsampling Bayesian inference");
    add_common(qbird);
    add_schedule(qbird);
    qbird->add_option("--lower", cfg.qbird.lower, "prior lower bounds")->delimiter(',');
    qbird->add_option("--upper", cfg.qbird.upper, "prior upper bounds")->delimiter(',');
    qbird->add_option("--shape", cfg.qbird.shape, "per-parameter prior shape")
        ->delimiter(',');
    qbird->add_option("--prior-mean", cfg.qbird.prior_mean, "gaussian prior means")
        ->delimiter(',');
    qbird->add_option("--prior-sigma", cfg.qbird.prior_sigma, "gaussian prior sigmas")
        ->delimiter(',');
    qbird->add_option("--truth", cfg.qbird.truth, "injected parameter values")
        ->delimiter(',');
    qbird->add_option("--widths", cfg.qbird.widths, "likelihood widths per parameter")
        ->delimiter(',');
    qbird->add_option("--q0", cfg.qbird.initial_qubits, "initial qubits per parameter");
    qbird->add_option("--walk-steps", cfg.qbird.walk_steps,
                      "walk applications per renormalization stage");
    qbird->add_option("--outer", cfg.qbird.outer_iterations, "outer iterations");
    qbird->add_option("--k", cfg.qbird.interval_factor, "interval width factor");
    qbird->add_option("--shots", cfg.shots, "samples per sampling step");
    qbird->add_option("--out", cfg.out, "corner-plot CSV output path");
    qbird->add_option("--summary-out", cfg.summary_out, "run summary JSON path");

    CLI::App* exponent = app.add_subcommand(
        "exponent", "refit the scaling exponent from a TTS CSV");
    add_common(exponent);
    exponent->add_option("--in", cfg.in, "TTS CSV input path");

    CLI::App* grover = app.add_subcommand(
        "grover-check", "success probability of Grover search");
    add_common(grover);
    grover->add_option("--n", cfg.n, "search qubits");
    grover->add_option("--marked", cfg.marked, "marked basis state");
    grover->add_option("--iterations", cfg.iterations, "oracle+diffusion rounds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (solve->parsed()) cfg.subcommand = "solve";
    else if (compare->parsed()) cfg.subcommand = "compare";
    else if (qbird->parsed()) cfg.subcommand = "qbird";
    else if (exponent->parsed()) cfg.subcommand = "exponent";
    else if (grover->parsed()) cfg.subcommand = "grover-check";

    if (cfg.subcommand == "solve") return run_solve(cfg);
    if (cfg.subcommand == "compare") return run_compare(cfg);
    if (cfg.subcommand == "qbird") return run_qbird(cfg);
    if (cfg.subcommand == "exponent") return run_exponent(cfg);
    if (cfg.subcommand == "grover-check") return run_grover_check(cfg);
    std::cerr << app.help();
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const qmh::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 3;
    } catch (const qmh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
