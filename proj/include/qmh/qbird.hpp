#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmh/io.hpp"
#include "qmh/problem.hpp"
#include "qmh/rng.hpp"
#include "qmh/schedule.hpp"
#include "qmh/statevector.hpp"
#include "qmh/walk.hpp"

namespace qmh {

/// Per-parameter search interval with the shape used for the initial draw.
struct Prior {
    enum class Shape { Uniform, Gaussian };

    double lower = 0.0;
    double upper = 1.0;
    Shape shape = Shape::Uniform;
    double mean = 0.0;  // gaussian only
    double sigma = 1.0; // gaussian only

    void validate() const {
        if (!(lower < upper)) {
            throw std::invalid_argument("Prior: lower must be < upper");
        }
        if (shape == Shape::Gaussian && !(sigma > 0.0)) {
            throw std::invalid_argument("Prior: gaussian sigma must be > 0");
        }
    }

    double width() const { return upper - lower; }
};

/// Cost over parameter-space points theta (P entries, parameter units).
using CostFn = std::function<double(const std::vector<double>&)>;

/// C(theta) = 1/2 sum_k ((theta_k - truth_k) / width_k)^2, the negative log
/// of a separable Gaussian likelihood with the truth injected at its minimum.
inline CostFn gaussian_cost(std::vector<double> truth, std::vector<double> widths) {
    if (truth.size() != widths.size() || truth.empty()) {
        throw std::invalid_argument("gaussian_cost: truth/widths size mismatch");
    }
    for (double w : widths) {
        if (!(w > 0.0)) throw std::invalid_argument("gaussian_cost: widths must be > 0");
    }
    return [truth = std::move(truth),
            widths = std::move(widths)](const std::vector<double>& theta) {
        double c = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const double d = (theta[k] - truth[k]) / widths[k];
            c += 0.5 * d * d;
        }
        return c;
    };
}

struct QBirdConfig {
    std::vector<Prior> priors;          // one per parameter
    std::uint32_t initial_qubits = 3;   // Q0, discretization per parameter
    std::uint64_t walk_steps = 4;       // L, walk applications per stage
    std::uint32_t outer_iterations = 1;
    std::uint64_t shots = 256;          // per sampling step
    double interval_factor = 2.0;       // k in [mean - k*std, mean + k*std]
    AnnealingSchedule schedule;
    std::uint64_t seed = 0;
    std::uint32_t qubit_limit = kDefaultQubitLimit;

    void validate() const {
        if (priors.empty()) throw std::invalid_argument("QBirdConfig: no priors");
        for (const Prior& p : priors) p.validate();
        if (initial_qubits < 1) {
            throw std::invalid_argument("QBirdConfig: initial_qubits must be >= 1");
        }
        if (!(interval_factor > 0.0)) {
            throw std::invalid_argument("QBirdConfig: interval_factor must be > 0");
        }
        if (shots < 1) throw std::invalid_argument("QBirdConfig: shots must be >= 1");
    }
};

/// Discrete problem on the current grids: the walk sees grid indices, the
/// cost function sees parameter values.
inline ProblemSpec make_grid_problem(std::vector<ParameterGrid> grids,
                                     CostFn cost_fn,
                                     std::string label = "grid-problem") {
    if (grids.empty()) throw std::invalid_argument("make_grid_problem: no grids");
    const std::uint32_t p = static_cast<std::uint32_t>(grids.size());
    const std::uint32_t q = grids[0].qubits;
    for (const ParameterGrid& g : grids) {
        if (g.qubits != q) {
            throw std::invalid_argument("make_grid_problem: mixed grid resolutions");
        }
    }
    return ProblemSpec(
        p, q,
        [grids = std::move(grids),
         cost_fn = std::move(cost_fn)](const std::vector<std::uint32_t>& values) {
            std::vector<double> theta(values.size());
            for (std::size_t k = 0; k < values.size(); ++k) {
                theta[k] = grids[k].value(values[k]);
            }
            return cost_fn(theta);
        },
        std::move(label));
}

// ---------------------------------------------------------------------------
// Step 0: parameter initialization
// ---------------------------------------------------------------------------

struct InitialParameters {
    std::vector<ParameterGrid> grids; // priors discretized at Q0
    std::vector<double> start_values; // one draw per parameter
};

/// Maps each prior interval onto grid indices (midpoint convention) and draws
/// the starting values from the prior shapes; gaussian draws are clamped into
/// the interval.
inline InitialParameters initialize_parameters(const QBirdConfig& config, Rng& rng) {
    config.validate();
    InitialParameters init;
    for (const Prior& prior : config.priors) {
        init.grids.push_back({prior.lower, prior.upper, config.initial_qubits});
        double draw;
        if (prior.shape == Prior::Shape::Uniform) {
            draw = prior.lower + next_double(rng) * prior.width();
        } else {
            draw = prior.mean + prior.sigma * next_gaussian(rng);
            draw = std::min(prior.upper, std::max(prior.lower, draw));
        }
        init.start_values.push_back(draw);
    }
    return init;
}

// ---------------------------------------------------------------------------
// Step 1: renormalization & downsampling
// ---------------------------------------------------------------------------

/// Drops the least significant qubit of every parameter: the coarse cell b
/// collects P(2b) + P(2b+1) along each parameter dimension. Probability mass
/// is conserved exactly up to floating-point addition.
inline std::vector<double> coarse_grain(const std::vector<double>& dist,
                                        std::uint32_t variables,
                                        std::uint32_t qubits_per_variable) {
    if (qubits_per_variable < 1) {
        throw std::invalid_argument("coarse_grain: need at least 1 qubit");
    }
    if (dist.size() != (1ULL << (variables * qubits_per_variable))) {
        throw std::invalid_argument("coarse_grain: distribution size mismatch");
    }
    const std::uint32_t q = qubits_per_variable;
    const std::uint64_t vmask = (1ULL << q) - 1;
    std::vector<double> reduced(1ULL << (variables * (q - 1)), 0.0);
    for (std::uint64_t s = 0; s < dist.size(); ++s) {
        std::uint64_t target = 0;
        for (std::uint32_t v = 0; v < variables; ++v) {
            const std::uint64_t cell = (s >> (v * q)) & vmask;
            target |= (cell >> 1) << (v * (q - 1));
        }
        reduced[target] += dist[s];
    }
    return reduced;
}

/// One drawn sample: grid-cell midpoints in parameter units plus the cell
/// widths of the grid it was drawn on (coarse stages have wide cells).
struct WeightedSample {
    std::vector<double> value;
    std::vector<double> cell_width;
};

/// Everything one renormalization pass (Step 1) produced.
struct StageTrace {
    /// Every sample drawn, all stages pooled, finest stage first.
    std::vector<WeightedSample> samples;
    /// Empirical state-register distribution per stage, finest first.
    std::vector<std::vector<double>> stage_distributions;
    /// The distribution at the 1-qubit-per-parameter threshold.
    std::vector<double> reduced_distribution;
};

/// Runs the walk / sample / reduce recursion from the grids' resolution down
/// to one qubit per parameter. Each stage evolves L steps from the uniform
/// state on the rebuilt coarser problem and samples the state register.
inline StageTrace renormalize_downsample(const std::vector<ParameterGrid>& grids,
                                         const CostFn& cost_fn,
                                         const QBirdConfig& config,
                                         std::uint64_t iteration_index) {
    if (grids.empty() || grids[0].qubits < 1) {
        throw std::invalid_argument("renormalize_downsample: invalid grids");
    }
    StageTrace trace;
    std::vector<ParameterGrid> stage_grids = grids;
    for (std::uint32_t q = grids[0].qubits;; --q) {
        for (ParameterGrid& g : stage_grids) g.qubits = q;
        const ProblemSpec spec =
            make_grid_problem(stage_grids, cost_fn, "qbird-stage");

        WalkConfig walk;
        walk.schedule = config.schedule;
        walk.steps = config.walk_steps;
        walk.qubit_limit = config.qubit_limit;
        const EvolveResult run = evolve(walk, spec);

        Rng rng = make_rng(config.seed, "qbird-sample", iteration_index, q);
        const std::vector<std::uint64_t> draws =
            sample(run.final_state, spec.layout().state(), config.shots, rng);

        std::vector<double> dist(spec.state_count(), 0.0);
        const double weight = 1.0 / static_cast<double>(config.shots);
        for (std::uint64_t d : draws) {
            dist[d] += weight;
            WeightedSample sample;
            sample.value.resize(spec.variables);
            sample.cell_width.resize(spec.variables);
            for (std::uint32_t v = 0; v < spec.variables; ++v) {
                const std::uint64_t cell = (d >> (v * q)) & ((1ULL << q) - 1);
                sample.value[v] = stage_grids[v].value(cell);
                sample.cell_width[v] = stage_grids[v].cell_width();
            }
            trace.samples.push_back(std::move(sample));
        }
        trace.stage_distributions.push_back(dist);

        if (q == 1) {
            trace.reduced_distribution = std::move(dist);
            return trace;
        }
        // The reduction itself; the next stage rebuilds the problem at q - 1.
        trace.reduced_distribution = coarse_grain(dist, spec.variables, q);
    }
}

// ---------------------------------------------------------------------------
// Steps 2 and 3: statistics and interval shrinking
// ---------------------------------------------------------------------------

struct MeanStd {
    std::vector<double> mean;
    std::vector<double> std_dev; // population standard deviation
};

inline MeanStd mean_std(const std::vector<std::vector<double>>& samples) {
    if (samples.empty()) {
        throw std::invalid_argument("mean_std: empty sample set");
    }
    const std::size_t p = samples[0].size();
    MeanStd out{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
    for (const auto& s : samples) {
        for (std::size_t k = 0; k < p; ++k) out.mean[k] += s[k];
    }
    for (double& m : out.mean) m /= static_cast<double>(samples.size());
    for (const auto& s : samples) {
        for (std::size_t k = 0; k < p; ++k) {
            const double d = s[k] - out.mean[k];
            out.std_dev[k] += d * d;
        }
    }
    for (double& v : out.std_dev) {
        v = std::sqrt(v / static_cast<double>(samples.size()));
    }
    return out;
}

/// Splits one sample's cell [value - w/2, value + w/2] across the bins of a
/// grid, proportional to overlap. Coarse-stage samples thus spread over every
/// fine bin their cell covers instead of spiking at the cell midpoint.
inline std::vector<std::pair<std::uint64_t, double>>
smear_over_grid(const ParameterGrid& grid, double value, double width) {
    std::vector<std::pair<std::uint64_t, double>> parts;
    if (!(width > 0.0)) {
        parts.push_back({grid.index(value), 1.0});
        return parts;
    }
    const double lo = value - width / 2.0;
    const double hi = value + width / 2.0;
    const std::uint64_t first = grid.index(lo);
    const std::uint64_t last = grid.index(hi);
    for (std::uint64_t b = first; b <= last; ++b) {
        const double bin_lo = grid.lower + static_cast<double>(b) * grid.cell_width();
        const double bin_hi = bin_lo + grid.cell_width();
        const double overlap = std::min(hi, bin_hi) - std::max(lo, bin_lo);
        if (overlap > 0.0) parts.push_back({b, overlap / width});
    }
    return parts;
}

/// New search interval [mean - k*std, mean + k*std] intersected with the
/// previous one. std = 0 floors the width at one grid cell (floor_width)
/// centered on the mean; the result is never empty.
inline Prior new_intervals(double mean, double std_dev, double k,
                           const Prior& previous, double floor_width) {
    if (!(k > 0.0)) throw std::invalid_argument("new_intervals: k must be > 0");
    double lo, hi;
    if (std_dev == 0.0) {
        lo = mean - 0.5 * floor_width;
        hi = mean + 0.5 * floor_width;
    } else {
        lo = mean - k * std_dev;
        hi = mean + k * std_dev;
    }
    lo = std::max(lo, previous.lower);
    hi = std::min(hi, previous.upper);
    if (!(lo < hi)) {
        // Degenerate after clipping: floor-width window around the clamped mean.
        const double center =
            std::min(previous.upper, std::max(previous.lower, mean));
        lo = std::max(previous.lower, center - 0.5 * floor_width);
        hi = std::min(previous.upper, center + 0.5 * floor_width);
        if (!(lo < hi)) {
            lo = previous.lower;
            hi = previous.upper;
        }
    }
    return Prior{lo, hi, Prior::Shape::Uniform, 0.0, 1.0};
}

// ---------------------------------------------------------------------------
// The full loop
// ---------------------------------------------------------------------------

struct PairHistogram {
    std::uint32_t param_i = 0;
    std::uint32_t param_j = 0;
    std::vector<double> probabilities; // row-major: bin_i * cells + bin_j
};

struct PosteriorResult {
    std::vector<ParameterGrid> final_grids;        // last iteration, Q0 resolution
    std::vector<std::vector<double>> histograms;   // per parameter, sum to 1
    std::vector<PairHistogram> pair_histograms;    // all i < j pairs
    std::vector<std::vector<double>> iteration_means;
    std::vector<std::vector<double>> iteration_stds;
    std::vector<double> start_values;
    bool converged = false;
};

/// Executes Steps 0-3 for the configured number of outer iterations and
/// accumulates every iteration's samples (equal weight per iteration) into
/// final 1-D and pairwise 2-D histograms on the last iteration's grids.
/// With outer_iterations = 0 the histograms reflect plain prior sampling.
inline PosteriorResult run_inference(const QBirdConfig& config,
                                     const CostFn& cost_fn) {
    config.validate();
    const std::uint32_t p = static_cast<std::uint32_t>(config.priors.size());

    Rng init_rng = make_rng(config.seed, "qbird-init");
    const InitialParameters init = initialize_parameters(config, init_rng);

    PosteriorResult result;
    result.start_values = init.start_values;

    std::vector<Prior> intervals = config.priors;
    std::vector<ParameterGrid> grids = init.grids;
    std::vector<std::vector<WeightedSample>> samples_per_iteration;

    if (config.outer_iterations == 0) {
        Rng rng = make_rng(config.seed, "qbird-prior-sampling");
        std::vector<WeightedSample> draws;
        for (std::uint64_t s = 0; s < config.shots; ++s) {
            WeightedSample sample;
            sample.value.resize(p);
            sample.cell_width.assign(p, 0.0); // continuous prior draws
            for (std::uint32_t k = 0; k < p; ++k) {
                const Prior& prior = config.priors[k];
                if (prior.shape == Prior::Shape::Uniform) {
                    sample.value[k] = prior.lower + next_double(rng) * prior.width();
                } else {
                    sample.value[k] = std::min(
                        prior.upper,
                        std::max(prior.lower,
                                 prior.mean + prior.sigma * next_gaussian(rng)));
                }
            }
            draws.push_back(std::move(sample));
        }
        samples_per_iteration.push_back(std::move(draws));
    }

    for (std::uint32_t iter = 0; iter < config.outer_iterations; ++iter) {
        const StageTrace trace =
            renormalize_downsample(grids, cost_fn, config, iter);
        std::vector<std::vector<double>> values;
        values.reserve(trace.samples.size());
        for (const WeightedSample& s : trace.samples) values.push_back(s.value);
        const MeanStd stats = mean_std(values);
        result.iteration_means.push_back(stats.mean);
        result.iteration_stds.push_back(stats.std_dev);
        samples_per_iteration.push_back(trace.samples);

        if (iter + 1 < config.outer_iterations) {
            for (std::uint32_t k = 0; k < p; ++k) {
                intervals[k] =
                    new_intervals(stats.mean[k], stats.std_dev[k],
                                  config.interval_factor, intervals[k],
                                  grids[k].cell_width());
                grids[k] = {intervals[k].lower, intervals[k].upper,
                            config.initial_qubits};
            }
        }
    }
    result.final_grids = grids;

    // Equal weight per iteration, samples equally weighted within one.
    const std::uint64_t cells = 1ULL << config.initial_qubits;
    result.histograms.assign(p, std::vector<double>(cells, 0.0));
    for (std::uint32_t i = 0; i < p; ++i) {
        for (std::uint32_t j = i + 1; j < p; ++j) {
            result.pair_histograms.push_back(
                {i, j, std::vector<double>(cells * cells, 0.0)});
        }
    }
    const double iter_weight =
        samples_per_iteration.empty()
            ? 0.0
            : 1.0 / static_cast<double>(samples_per_iteration.size());
    for (const auto& samples : samples_per_iteration) {
        if (samples.empty()) continue;
        const double w = iter_weight / static_cast<double>(samples.size());
        for (const WeightedSample& sample : samples) {
            std::vector<std::vector<std::pair<std::uint64_t, double>>> parts(p);
            for (std::uint32_t k = 0; k < p; ++k) {
                parts[k] = smear_over_grid(result.final_grids[k], sample.value[k],
                                           sample.cell_width[k]);
                for (const auto& [bin, fraction] : parts[k]) {
                    result.histograms[k][bin] += w * fraction;
                }
            }
            std::size_t pair = 0;
            for (std::uint32_t i = 0; i < p; ++i) {
                for (std::uint32_t j = i + 1; j < p; ++j, ++pair) {
                    for (const auto& [bi, fi] : parts[i]) {
                        for (const auto& [bj, fj] : parts[j]) {
                            result.pair_histograms[pair]
                                .probabilities[bi * cells + bj] += w * fi * fj;
                        }
                    }
                }
            }
        }
    }
    const auto normalize = [](std::vector<double>& h) {
        double total = 0.0;
        for (double v : h) total += v;
        if (total > 0.0) {
            for (double& v : h) v /= total;
        }
    };
    for (auto& h : result.histograms) normalize(h);
    for (auto& ph : result.pair_histograms) normalize(ph.probabilities);

    // Converged when the estimated means settled to within one final-grid
    // cell between the last two iterations.
    if (result.iteration_means.size() >= 2) {
        const auto& last = result.iteration_means.back();
        const auto& prev = result.iteration_means[result.iteration_means.size() - 2];
        result.converged = true;
        for (std::uint32_t k = 0; k < p; ++k) {
            if (std::abs(last[k] - prev[k]) >= result.final_grids[k].cell_width()) {
                result.converged = false;
                break;
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Output schemas
// ---------------------------------------------------------------------------

inline constexpr const char* kCornerCsvHeader =
    "param_i,param_j,bin_i,bin_j,probability";

/// Long-format corner-plot data: one row per 2-D bin for every parameter
/// pair, plus 1-D marginal rows with param_j and bin_j left empty.
inline std::string corner_csv(const PosteriorResult& result) {
    std::ostringstream out;
    out << kCornerCsvHeader << '\n';
    for (std::size_t k = 0; k < result.histograms.size(); ++k) {
        const auto& h = result.histograms[k];
        for (std::size_t b = 0; b < h.size(); ++b) {
            out << k << ",," << b << ",," << format_double(h[b]) << '\n';
        }
    }
    for (const PairHistogram& ph : result.pair_histograms) {
        const std::size_t cells = result.histograms[ph.param_i].size();
        for (std::size_t bi = 0; bi < cells; ++bi) {
            for (std::size_t bj = 0; bj < cells; ++bj) {
                out << ph.param_i << ',' << ph.param_j << ',' << bi << ',' << bj
                    << ',' << format_double(ph.probabilities[bi * cells + bj])
                    << '\n';
            }
        }
    }
    return out.str();
}

} // namespace qmh
