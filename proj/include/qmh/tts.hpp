#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmh/classical.hpp"
#include "qmh/io.hpp"
#include "qmh/problem.hpp"
#include "qmh/schedule.hpp"
#include "qmh/walk.hpp"

namespace qmh {

inline constexpr double kInfiniteTts = std::numeric_limits<double>::infinity();

/// One (t, p, TTS) point of a success curve, with enough context to be a
/// self-contained CSV row.
struct TTSRecord {
    std::string problem;
    std::uint32_t n = 0; // problem size descriptor
    std::uint32_t variables = 0;
    std::uint32_t qubits_per_variable = 0;
    std::string algorithm; // "classical" | "quantum"
    std::string schedule;
    double beta0 = 0.0;
    std::uint64_t t = 0;
    double p = 0.0;
    double tts = kInfiniteTts;
    double delta = 0.9;
    std::uint64_t seed = 0;
};

/// TTS(t) = t * max(1, log(1 - delta) / log(1 - p)). The max floor keeps one
/// run of t steps as the physical minimum when p exceeds delta; p = 0 maps to
/// the infinity sentinel and p = 1 to exactly t.
inline double compute_tts(std::uint64_t t, double p, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("compute_tts: delta must be in (0,1), got " +
                                    format_double(delta));
    }
    if (t < 1) {
        throw std::invalid_argument("compute_tts: t must be >= 1");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("compute_tts: p must be in [0,1], got " +
                                    format_double(p));
    }
    if (p == 0.0) return kInfiniteTts;
    if (p == 1.0) return static_cast<double>(t);
    const double ratio = std::log1p(-delta) / std::log1p(-p);
    return static_cast<double>(t) * std::max(1.0, ratio);
}

struct MinTtsResult {
    std::vector<double> tts;                            // tts[i] for t = i + 1
    std::optional<std::pair<std::uint64_t, double>> best; // (t*, tts*); empty if all infinite
};

/// Scans the whole curve (p[i] is the success probability at t = i + 1) and
/// returns the minimizer, ties broken toward smaller t. An all-infinite curve
/// is a no-solution outcome, not an error.
inline MinTtsResult min_tts_curve(const std::vector<double>& p_curve, double delta) {
    if (p_curve.empty()) {
        throw std::invalid_argument("min_tts_curve: empty curve");
    }
    MinTtsResult result;
    result.tts.reserve(p_curve.size());
    for (std::size_t i = 0; i < p_curve.size(); ++i) {
        const std::uint64_t t = i + 1;
        const double tts = compute_tts(t, p_curve[i], delta);
        result.tts.push_back(tts);
        if (std::isfinite(tts) && (!result.best || tts < result.best->second)) {
            result.best = {t, tts};
        }
    }
    return result;
}

struct ExponentFit {
    double exponent = 0.0; // slope of log y vs log x
    double intercept = 0.0;
    double residual_norm = 0.0;
    std::size_t points = 0;
};

/// Least-squares line through (log x, log y); the slope is the scaling
/// exponent, with < 1 read as the scaling-advantage signal.
inline ExponentFit fit_exponent(
    const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) {
        throw std::invalid_argument("fit_exponent: need at least 2 points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& [x, y] = points[i];
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
            throw std::invalid_argument(
                "fit_exponent: point " + std::to_string(i) + " = (" +
                format_double(x) + ", " + format_double(y) +
                ") is not finite and positive");
        }
    }
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double lx = std::log(x);
        const double ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        throw std::invalid_argument(
            "fit_exponent: all classical TTS values coincide; slope undefined");
    }
    ExponentFit fit;
    fit.points = points.size();
    fit.exponent = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.exponent * sx) / n;
    double rss = 0.0;
    for (const auto& [x, y] : points) {
        const double r = std::log(y) - (fit.intercept + fit.exponent * std::log(x));
        rss += r * r;
    }
    fit.residual_norm = std::sqrt(rss);
    return fit;
}

// ---------------------------------------------------------------------------
// Comparison pipeline
// ---------------------------------------------------------------------------

struct CompareConfig {
    std::string problem = "ising"; // "ising" | "nqueens"
    std::vector<std::uint32_t> sizes;
    AnnealingSchedule schedule;
    double delta = 0.9;
    std::uint64_t t_max = 40;
    std::uint64_t seed = 0;
    bool classical_only = false;
    /// 0 reads quantum p(t) exactly from the statevector marginal; > 0 models
    /// experimental estimation by sampling that many shots per step.
    std::uint64_t quantum_shots = 0;
    /// Chains used for the classical curve when the exact path is over capacity.
    std::uint64_t fallback_chains = 20000;
    std::uint32_t acceptance_qubits = 0;
    ReflectionTarget reflection_target = ReflectionTarget::MoveCoin;
    std::uint32_t qubit_limit = kDefaultQubitLimit;
    std::uint32_t threads = 1;
};

struct MinTtsPair {
    std::uint32_t size = 0;
    double classical_tts = kInfiniteTts;
    double quantum_tts = kInfiniteTts;
};

struct CompareResult {
    std::vector<TTSRecord> records;
    std::vector<MinTtsPair> pairs;
    std::optional<ExponentFit> fit;
    std::vector<std::string> warnings;
};

inline ProblemSpec make_problem(const std::string& problem, std::uint32_t size) {
    if (problem == "ising") return make_ising_chain(size);
    if (problem == "nqueens") return make_nqueens(size);
    throw std::invalid_argument("unknown problem: " + problem);
}

/// Runs the classical and quantum success curves per size, records TTS for
/// every t, pairs the minima and fits the scaling exponent. Sizes beyond the
/// simulator capacity are skipped with a recorded warning.
inline CompareResult compare(const CompareConfig& config) {
    CompareResult result;
    std::vector<std::pair<double, double>> fit_points;

    for (const std::uint32_t size : config.sizes) {
        const ProblemSpec spec = make_problem(config.problem, size);
        const auto push_records = [&](const std::string& algorithm,
                                      const std::vector<double>& p_by_t,
                                      const MinTtsResult& mins) {
            for (std::size_t i = 0; i < p_by_t.size(); ++i) {
                result.records.push_back({spec.label, size, spec.variables,
                                          spec.qubits_per_variable, algorithm,
                                          to_string(config.schedule.kind),
                                          config.schedule.beta0, i + 1, p_by_t[i],
                                          mins.tts[i], config.delta, config.seed});
            }
        };

        // Classical curve: exact propagation when it fits, sampled otherwise.
        std::vector<double> classical_p;
        if (spec.state_qubits() <= kExactChainLimit) {
            const std::vector<double> full =
                exact_success_probability(spec, config.schedule, config.t_max);
            classical_p.assign(full.begin() + 1, full.end());
        } else if (spec.state_qubits() <= config.qubit_limit) {
            const ChainCurve curve =
                run_chains(spec, config.schedule, config.t_max,
                           config.fallback_chains, config.seed, config.threads);
            classical_p.assign(curve.p.begin() + 1, curve.p.end());
        } else {
            result.warnings.push_back(spec.label + ": " +
                                      std::to_string(spec.state_qubits()) +
                                      " state qubits exceed capacity; size skipped");
            continue;
        }
        const MinTtsResult classical_min = min_tts_curve(classical_p, config.delta);
        push_records("classical", classical_p, classical_min);

        if (config.classical_only) continue;

        const RegisterLayout layout = spec.layout(config.acceptance_qubits);
        if (layout.total_qubits() > config.qubit_limit) {
            result.warnings.push_back(spec.label + ": walk needs " +
                                      std::to_string(layout.total_qubits()) +
                                      " qubits, over the limit of " +
                                      std::to_string(config.qubit_limit) +
                                      "; quantum side skipped");
            continue;
        }

        WalkConfig walk;
        walk.schedule = config.schedule;
        walk.steps = config.t_max;
        walk.acceptance_qubits = config.acceptance_qubits;
        walk.reflection_target = config.reflection_target;
        walk.qubit_limit = config.qubit_limit;

        std::vector<double> quantum_p;
        if (config.quantum_shots == 0) {
            const EvolveResult run = evolve(walk, spec);
            for (std::size_t t = 1; t < run.reports.size(); ++t) {
                quantum_p.push_back(run.reports[t].ground_probability);
            }
        } else {
            // Shot-sampled estimation of the same curve.
            const GroundSet ground = brute_force_ground(spec);
            std::vector<std::uint8_t> is_ground(spec.state_count(), 0);
            for (std::uint64_t g : ground.states) is_ground[g] = 1;
            Rng rng = make_rng(config.seed, "quantum-shots", size);
            quantum_p.assign(config.t_max, 0.0);
            evolve(walk, spec, [&](std::uint64_t t, const Statevector& psi) {
                if (t == 0) return;
                const auto draws =
                    sample(psi, spec.layout().state(), config.quantum_shots, rng);
                std::uint64_t hits = 0;
                for (std::uint64_t d : draws) hits += is_ground[d];
                quantum_p[t - 1] = static_cast<double>(hits) /
                                   static_cast<double>(config.quantum_shots);
            });
        }
        const MinTtsResult quantum_min = min_tts_curve(quantum_p, config.delta);
        push_records("quantum", quantum_p, quantum_min);

        if (classical_min.best && quantum_min.best) {
            result.pairs.push_back(
                {size, classical_min.best->second, quantum_min.best->second});
            fit_points.push_back(
                {classical_min.best->second, quantum_min.best->second});
        }
    }

    if (!config.classical_only && fit_points.size() >= 2) {
        result.fit = fit_exponent(fit_points);
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV emission (column order is part of the interface)
// ---------------------------------------------------------------------------

inline constexpr const char* kTtsCsvHeader =
    "problem,n,P,Q,algorithm,schedule,beta0,t,p,tts,delta,seed";

inline std::string tts_csv(const std::vector<TTSRecord>& records) {
    std::ostringstream out;
    out << kTtsCsvHeader << '\n';
    for (const TTSRecord& r : records) {
        out << r.problem << ',' << r.n << ',' << r.variables << ','
            << r.qubits_per_variable << ',' << r.algorithm << ',' << r.schedule
            << ',' << format_double(r.beta0) << ',' << r.t << ','
            << format_double(r.p) << ',' << format_double(r.tts) << ','
            << format_double(r.delta) << ',' << r.seed << '\n';
    }
    return out.str();
}

} // namespace qmh
