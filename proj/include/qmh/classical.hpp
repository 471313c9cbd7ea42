#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

#include "qmh/problem.hpp"
#include "qmh/rng.hpp"
#include "qmh/schedule.hpp"

namespace qmh {

/// State qubits above this would need a 2^(PQ) x 2^(PQ) matrix.
inline constexpr std::uint32_t kExactChainLimit = 14;

struct ChainState {
    std::vector<std::uint32_t> values;
    std::uint64_t step = 0;
};

/// One Metropolis-Hastings update: a uniform draw among the 2P moves,
/// accepted with probability min(1, e^(-beta * deltaC)). Rejections leave the
/// state unchanged; the step counter advances either way.
inline void mh_step(ChainState& chain, const ProblemSpec& spec, double beta,
                    Rng& rng) {
    const Move move = move_from_index(next_below(rng, 2ULL * spec.variables));
    const std::vector<std::uint32_t> candidate = apply_move(chain.values, move, spec);
    const double delta = spec.cost(candidate) - spec.cost(chain.values);
    if (next_double(rng) < acceptance_probability(beta, delta)) {
        chain.values = candidate;
    }
    ++chain.step;
}

struct TransitionMatrix {
    double beta = 0.0;
    std::uint64_t dim = 0;
    std::vector<double> entries; // row-major, rows sum to 1

    double at(std::uint64_t from, std::uint64_t to) const {
        return entries[from * dim + to];
    }
};

/// Dense one-step transition matrix: T[i->j] = (1/2P) * A(i->j) summed over
/// the moves reaching j, with rejected mass absorbed on the diagonal.
inline TransitionMatrix transition_matrix(const ProblemSpec& spec, double beta,
                                          std::uint32_t limit = kExactChainLimit) {
    detail::check_state_capacity(spec, limit, "transition_matrix");
    const std::vector<double> costs = build_cost_table(spec);
    const std::uint64_t dim = spec.state_count();
    const double move_weight = 1.0 / (2.0 * spec.variables);

    TransitionMatrix t{beta, dim, std::vector<double>(dim * dim, 0.0)};
    for (std::uint64_t i = 0; i < dim; ++i) {
        double stay = 0.0;
        for (const Move& move : all_moves(spec)) {
            const std::uint64_t j = apply_move_encoded(i, move, spec);
            const double accept = acceptance_probability(beta, costs[j] - costs[i]);
            t.entries[i * dim + j] += move_weight * accept;
            stay += move_weight * (1.0 - accept);
        }
        t.entries[i * dim + i] += stay;
    }
    return t;
}

/// Exact p(t) for t = 0..t_max: ground-set mass of the distribution obtained
/// by chaining T(beta_t) from the uniform start. Applies rows sparsely, so no
/// dense matrix is materialized.
inline std::vector<double> exact_success_probability(
    const ProblemSpec& spec, const AnnealingSchedule& schedule,
    std::uint64_t t_max, std::uint32_t limit = kExactChainLimit) {
    detail::check_state_capacity(spec, limit, "exact_success_probability");
    const std::vector<double> costs = build_cost_table(spec);
    const GroundSet ground = brute_force_ground(spec);
    const std::uint64_t dim = spec.state_count();
    const std::vector<Move> moves = all_moves(spec);
    const double move_weight = 1.0 / (2.0 * spec.variables);

    std::vector<double> dist(dim, 1.0 / static_cast<double>(dim));
    std::vector<double> next(dim);
    const auto ground_mass = [&]() {
        double mass = 0.0;
        for (std::uint64_t g : ground.states) mass += dist[g];
        return mass;
    };

    std::vector<double> p;
    p.reserve(t_max + 1);
    p.push_back(ground_mass());
    for (std::uint64_t t = 1; t <= t_max; ++t) {
        const double beta = schedule.beta(t - 1);
        std::fill(next.begin(), next.end(), 0.0);
        for (std::uint64_t i = 0; i < dim; ++i) {
            if (dist[i] == 0.0) continue;
            double stay = 0.0;
            for (const Move& move : moves) {
                const std::uint64_t j = apply_move_encoded(i, move, spec);
                const double accept =
                    acceptance_probability(beta, costs[j] - costs[i]);
                next[j] += dist[i] * move_weight * accept;
                stay += move_weight * (1.0 - accept);
            }
            next[i] += dist[i] * stay;
        }
        dist.swap(next);
        p.push_back(ground_mass());
    }
    return p;
}

struct ChainCurve {
    std::vector<double> p;  // empirical p(t), t = 0..t_max
    std::vector<double> se; // binomial standard error per entry
    std::uint64_t chains = 0;
};

/// Monte Carlo estimate of p(t) from independent chains with per-chain RNG
/// streams. Deterministic for a fixed seed regardless of the thread count.
inline ChainCurve run_chains(const ProblemSpec& spec,
                             const AnnealingSchedule& schedule,
                             std::uint64_t t_max, std::uint64_t chains,
                             std::uint64_t seed, std::uint32_t threads = 1) {
    if (chains < 1) {
        throw std::invalid_argument("run_chains: chains must be >= 1");
    }
    const GroundSet ground = brute_force_ground(spec);
    const std::unordered_set<std::uint64_t> ground_set(ground.states.begin(),
                                                       ground.states.end());

    const auto run_block = [&](std::uint64_t first, std::uint64_t last,
                               std::vector<std::uint64_t>& hits) {
        for (std::uint64_t c = first; c < last; ++c) {
            Rng rng = make_rng(seed, "chain", c);
            ChainState chain{decode(next_below(rng, spec.state_count()), spec), 0};
            if (ground_set.count(encode(chain.values, spec))) ++hits[0];
            for (std::uint64_t t = 1; t <= t_max; ++t) {
                mh_step(chain, spec, schedule.beta(t - 1), rng);
                if (ground_set.count(encode(chain.values, spec))) ++hits[t];
            }
        }
    };

    const std::uint32_t workers =
        static_cast<std::uint32_t>(std::min<std::uint64_t>(std::max(1u, threads), chains));
    std::vector<std::vector<std::uint64_t>> hits(
        workers, std::vector<std::uint64_t>(t_max + 1, 0));
    if (workers == 1) {
        run_block(0, chains, hits[0]);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t block = (chains + workers - 1) / workers;
        for (std::uint32_t w = 0; w < workers; ++w) {
            const std::uint64_t first = w * block;
            const std::uint64_t last = std::min(chains, first + block);
            pool.emplace_back(run_block, first, last, std::ref(hits[w]));
        }
        for (std::thread& th : pool) th.join();
    }

    ChainCurve curve{std::vector<double>(t_max + 1), std::vector<double>(t_max + 1),
                     chains};
    for (std::uint64_t t = 0; t <= t_max; ++t) {
        std::uint64_t total = 0;
        for (const auto& h : hits) total += h[t];
        const double p = static_cast<double>(total) / static_cast<double>(chains);
        curve.p[t] = p;
        curve.se[t] = std::sqrt(p * (1.0 - p) / static_cast<double>(chains));
    }
    return curve;
}

} // namespace qmh
