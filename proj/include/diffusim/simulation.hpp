#pragma once

#include <atomic>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "diffusim/imat_diffusion.hpp"
#include "diffusim/metrics.hpp"
#include "diffusim/rng.hpp"
#include "diffusim/scenario_config.hpp"
#include "diffusim/weights.hpp"

namespace diffusim {

namespace detail {

inline Vec draw_target_spectrum(const TargetGen& gen, int len, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(gen.lo, gen.hi);
    std::uniform_int_distribution<int> sign(0, 1);
    Vec spectrum(len);
    for (int j = 0; j < len; ++j) {
        const double m = mag(rng);
        spectrum[j] = sign(rng) ? m : -m;
    }
    return spectrum;
}

inline ObservabilityMask draw_mask(double obs_prob, int len, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Redraw empty masks: the local-MSD normalization needs at least one
    // observed component per node.
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(len));
        int count = 0;
        for (int j = 0; j < len; ++j) {
            bits[static_cast<std::size_t>(j)] = u(rng) < obs_prob ? 1 : 0;
            count += bits[static_cast<std::size_t>(j)];
        }
        if (count > 0) return ObservabilityMask(std::move(bits));
    }
    throw NumericError("observability mask stayed empty after 10000 redraws; obs_prob too small");
}

inline NetworkGraph draw_connected_graph(int n, double p, std::uint64_t rep_seed_v) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto rng = graph_stream(rep_seed_v, attempt);
        NetworkGraph g = NetworkGraph::erdos_renyi(n, p, rng);
        if (g.is_connected()) return g;
    }
    throw NumericError("topology regeneration cap exceeded: no connected graph in 100 attempts");
}

}  // namespace detail

/// One Monte Carlo repetition with a fresh target, masks, and graph, all
/// derived from rep_seed_v. Returns linear-scale MSD series.
inline RepTrace run_repetition(const ScenarioConfig& cfg, std::uint64_t rep_seed_v) {
    cfg.validate();
    const int n = cfg.n_nodes;
    const int len = cfg.vec_len;
    const Transform tf = Transform::make(cfg.transform, len);

    auto t_rng = target_stream(rep_seed_v);
    const Vec spectrum = detail::draw_target_spectrum(cfg.target, len, t_rng);
    const Vec target = tf.inverse(spectrum);

    auto m_rng = mask_stream(rep_seed_v);
    std::vector<ObservabilityMask> masks;
    masks.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        masks.push_back(cfg.observability == Observability::Full
                            ? ObservabilityMask::ones(len)
                            : detail::draw_mask(cfg.obs_prob, len, m_rng));

    const NetworkGraph graph = detail::draw_connected_graph(n, cfg.link_prob, rep_seed_v);

    std::vector<Vec> masked_targets;
    masked_targets.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        masked_targets.push_back(tf.apply_mask(masks[static_cast<std::size_t>(i)], target));

    std::vector<std::mt19937_64> rngs;
    rngs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rngs.push_back(node_stream(rep_seed_v, i));

    const LmsParams lms{cfg.mu, cfg.noise_sigma};

    RepTrace trace;
    trace.local.resize(n, cfg.horizon);
    trace.consensus.resize(cfg.horizon);

    auto record = [&](const std::vector<Vec>& omegas, long t) {
        for (int i = 0; i < n; ++i)
            trace.local(i, t - 1) = local_msd(omegas[static_cast<std::size_t>(i)],
                                              masked_targets[static_cast<std::size_t>(i)],
                                              masks[static_cast<std::size_t>(i)]);
        trace.consensus[t - 1] = consensus_msd(omegas, target);
    };

    const bool imat_arm =
        cfg.strategy == Strategy::ImatAdaptive || cfg.strategy == Strategy::ImatFixedThreshold;

    if (imat_arm) {
        NetworkContext ctx;
        ctx.graph = &graph;
        ctx.transform = &tf;
        ctx.true_masks = &masks;
        ctx.masked_targets = &masked_targets;
        ctx.lms = lms;
        ctx.gates = cfg.gates;
        ctx.schedule = cfg.schedule;
        if (cfg.strategy == Strategy::ImatFixedThreshold) ctx.schedule.beta1 = 0.0;
        ctx.support_policy = SupportPolicy::Estimated;

        std::vector<NodeState> states(static_cast<std::size_t>(n), NodeState::zeros(len));
        std::vector<Vec> omegas(static_cast<std::size_t>(n), Vec::Zero(len));
        for (long t = 1; t <= cfg.horizon; ++t) {
            step_network(states, ctx, t, rngs);
            for (int i = 0; i < n; ++i) omegas[static_cast<std::size_t>(i)] = states[static_cast<std::size_t>(i)].omega;
            record(omegas, t);
        }
        return trace;
    }

    // Scalar-state arms: conventional averaging, optimal-weight combination,
    // and no cooperation all keep just a time-domain estimate per node.
    std::vector<Vec> omegas(static_cast<std::size_t>(n), Vec::Zero(len));
    std::vector<Vec> adapted(static_cast<std::size_t>(n), Vec::Zero(len));

    std::vector<std::vector<int>> hoods;
    hoods.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) hoods.push_back(graph.neighbors(i));

    // Optimal per-component combiners, once per repetition (masks are fixed).
    std::vector<std::vector<Vec>> gains;
    if (cfg.strategy == Strategy::OracleOptimalWeights) {
        const double lambda_sq_value =
            cfg.target.sigma0_sq() / (cfg.noise_sigma * cfg.noise_sigma);
        gains.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            std::vector<ObservabilityMask> hood_masks;
            hood_masks.reserve(hoods[static_cast<std::size_t>(i)].size());
            for (int j : hoods[static_cast<std::size_t>(i)])
                hood_masks.push_back(masks[static_cast<std::size_t>(j)]);
            const Vec lam = Vec::Constant(static_cast<Eigen::Index>(hood_masks.size()), lambda_sq_value);
            gains.push_back(per_component_gains(hood_masks, lam));
        }
    }

    std::vector<Vec> spectra(static_cast<std::size_t>(n), Vec::Zero(len));
    for (long t = 1; t <= cfg.horizon; ++t) {
        for (int i = 0; i < n; ++i) {
            const Measurement meas = draw_measurement(masked_targets[static_cast<std::size_t>(i)],
                                                      lms, rngs[static_cast<std::size_t>(i)]);
            adapted[static_cast<std::size_t>(i)] =
                adapt(omegas[static_cast<std::size_t>(i)], meas, cfg.mu);
        }
        switch (cfg.strategy) {
            case Strategy::NoCooperation:
                omegas = adapted;
                break;
            case Strategy::ConventionalAveraging:
                for (int i = 0; i < n; ++i) {
                    Vec acc = Vec::Zero(len);
                    for (int j : hoods[static_cast<std::size_t>(i)])
                        acc += adapted[static_cast<std::size_t>(j)];
                    omegas[static_cast<std::size_t>(i)] =
                        acc / static_cast<double>(hoods[static_cast<std::size_t>(i)].size());
                }
                break;
            case Strategy::OracleOptimalWeights:
                for (int i = 0; i < n; ++i)
                    spectra[static_cast<std::size_t>(i)] =
                        tf.forward(adapted[static_cast<std::size_t>(i)]);
                for (int i = 0; i < n; ++i) {
                    Vec acc = Vec::Zero(len);
                    const auto& hood = hoods[static_cast<std::size_t>(i)];
                    for (std::size_t k = 0; k < hood.size(); ++k)
                        acc += gains[static_cast<std::size_t>(i)][k].cwiseProduct(
                            spectra[static_cast<std::size_t>(hood[k])]);
                    omegas[static_cast<std::size_t>(i)] = tf.inverse(acc);
                }
                break;
            default:
                throw NumericError("unhandled strategy");
        }
        record(omegas, t);
    }
    return trace;
}

/// Monte Carlo driver: runs cfg.reps repetitions (in parallel when hardware
/// allows; reduction is in repetition order, so thread count never changes
/// the output) and averages in linear scale.
inline MsdTrace run_simulation(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<RepTrace> traces(static_cast<std::size_t>(cfg.reps));

    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned workers =
        std::min<unsigned>(std::max(1u, hw), static_cast<unsigned>(cfg.reps));

    if (workers <= 1) {
        for (int r = 0; r < cfg.reps; ++r)
            traces[static_cast<std::size_t>(r)] = run_repetition(cfg, rep_seed(cfg.seed, r));
    } else {
        std::atomic<int> next{0};
        std::exception_ptr first_error;
        std::mutex err_mutex;
        auto worker = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= cfg.reps) return;
                try {
                    traces[static_cast<std::size_t>(r)] = run_repetition(cfg, rep_seed(cfg.seed, r));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    return average_traces(traces);
}

}  // namespace diffusim
