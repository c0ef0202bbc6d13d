#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <memory>
#include <numeric>
#include <random>

#include "diffusim/imat_diffusion.hpp"
#include "diffusim/metrics.hpp"
#include "diffusim/rng.hpp"
#include "diffusim/simulation.hpp"

using diffusim::FlowGates;
using diffusim::LmsParams;
using diffusim::NetworkContext;
using diffusim::NetworkGraph;
using diffusim::NodeState;
using diffusim::ObservabilityMask;
using diffusim::ThresholdSchedule;
using diffusim::Transform;
using diffusim::Vec;

namespace {

// Self-contained test network: target, masks, graph, and per-node streams
// built directly from the module APIs.
struct Bench {
    Transform tf = Transform::identity(1);
    NetworkGraph graph{1};
    std::vector<ObservabilityMask> masks;
    Vec target;
    std::vector<Vec> masked_targets;
    LmsParams lms;
    NetworkContext ctx;
    std::vector<NodeState> states;
    std::vector<std::mt19937_64> rngs;

    void step(long t) { diffusim::step_network(states, ctx, t, rngs); }
};

std::unique_ptr<Bench> make_bench(int n, int len, double link_p, double rho, bool full,
                                  double mu, double sigma, FlowGates gates,
                                  ThresholdSchedule schedule, std::uint64_t seed,
                                  diffusim::SupportPolicy policy =
                                      diffusim::SupportPolicy::Estimated) {
    auto b = std::make_unique<Bench>();
    b->tf = Transform::identity(len);
    b->lms = LmsParams{mu, sigma};

    const std::uint64_t rep = diffusim::rep_seed(seed, 0);

    std::mt19937_64 setup(diffusim::derive_seed(rep, 0xBEEF));
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::uniform_int_distribution<int> sign(0, 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    b->target.resize(len);
    for (int i = 0; i < len; ++i) b->target[i] = sign(setup) ? mag(setup) : -mag(setup);

    for (int i = 0; i < n; ++i) {
        if (full) {
            b->masks.push_back(ObservabilityMask::ones(len));
        } else {
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(len));
            int count = 0;
            do {
                count = 0;
                for (int j = 0; j < len; ++j) {
                    bits[static_cast<std::size_t>(j)] = u(setup) < rho ? 1 : 0;
                    count += bits[static_cast<std::size_t>(j)];
                }
            } while (count == 0);
            b->masks.push_back(ObservabilityMask(bits));
        }
    }

    for (int attempt = 0;; ++attempt) {
        REQUIRE(attempt < 100);
        auto grng = diffusim::graph_stream(rep, attempt);
        b->graph = NetworkGraph::erdos_renyi(n, link_p, grng);
        if (b->graph.is_connected()) break;
    }

    for (int i = 0; i < n; ++i)
        b->masked_targets.push_back(b->tf.apply_mask(b->masks[static_cast<std::size_t>(i)], b->target));

    for (int i = 0; i < n; ++i) b->rngs.push_back(diffusim::node_stream(rep, i));
    b->states.assign(static_cast<std::size_t>(n), NodeState::zeros(len));

    b->ctx.graph = &b->graph;
    b->ctx.transform = &b->tf;
    b->ctx.true_masks = &b->masks;
    b->ctx.masked_targets = &b->masked_targets;
    b->ctx.lms = b->lms;
    b->ctx.gates = gates;
    b->ctx.schedule = schedule;
    b->ctx.support_policy = policy;
    return b;
}

}  // namespace

TEST_CASE("threshold schedule closed form") {
    const ThresholdSchedule s{2.0, 0.25, 500.0};
    REQUIRE(diffusim::threshold_level(s, 0) == Catch::Approx(2.25).margin(1e-15));
    REQUIRE(diffusim::threshold_level(s, 1000000) == Catch::Approx(0.25).margin(1e-12));
    REQUIRE(diffusim::threshold_level(s, 500) ==
            Catch::Approx(2.0 / std::exp(1.0) + 0.25).margin(1e-13));
}

TEST_CASE("threshold schedule is nonincreasing and floored") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> amp(0.0, 5.0);
    std::uniform_real_distribution<double> decay(1.0, 1000.0);
    for (int trial = 0; trial < 20; ++trial) {
        const ThresholdSchedule s{amp(rng), amp(rng), decay(rng)};
        double prev = diffusim::threshold_level(s, 0);
        for (long t = 1; t <= 2000; t += 7) {
            const double level = diffusim::threshold_level(s, t);
            REQUIRE(level <= prev);
            REQUIRE(level >= s.beta0);
            prev = level;
        }
    }
}

TEST_CASE("support estimation thresholds strictly") {
    Vec x(3);
    x << 0.9, -0.2, 0.5;
    REQUIRE(diffusim::estimate_support(x, 0.4) == ObservabilityMask({1, 0, 1}));
    REQUIRE(diffusim::estimate_support(x, 0.0) == ObservabilityMask({1, 1, 1}));
    Vec y(2);
    y << 0.4, -0.4;
    REQUIRE(diffusim::estimate_support(y, 0.4) == ObservabilityMask({0, 0}));
}

TEST_CASE("local update blends only on-support components") {
    Vec psi(2), omega(2);
    psi << 2, 2;
    omega << 4, 4;
    REQUIRE(diffusim::local_update(psi, omega, ObservabilityMask({1, 1}), 0.0) == psi);
    REQUIRE(diffusim::local_update(psi, omega, ObservabilityMask({1, 1}), 1.0) == omega);
    Vec want(2);
    want << 3, 2;
    REQUIRE(diffusim::local_update(psi, omega, ObservabilityMask({1, 0}), 0.5) == want);
}

TEST_CASE("diffuse averages the vouching neighbors") {
    Vec a(1), b(1), own(1);
    a << 1.0;
    b << 3.0;
    own << 7.0;
    const ObservabilityMask active({1}), inactive({0});

    SECTION("mean over active neighbors") {
        const Vec out = diffusim::diffuse({{&a, &active}, {&b, &active}}, own);
        REQUIRE(out[0] == 2.0);
    }
    SECTION("no active neighbor keeps the node's own buffer") {
        const Vec out = diffusim::diffuse({{&a, &inactive}, {&b, &inactive}}, own);
        REQUIRE(out[0] == 7.0);
    }
    SECTION("self-only neighborhood with full support is the identity") {
        Vec psi(3);
        psi << 1, 2, 3;
        const ObservabilityMask full = ObservabilityMask::ones(3);
        const Vec out = diffusim::diffuse({{&psi, &full}}, psi);
        REQUIRE(out == psi);
    }
    SECTION("empty neighborhood is an argument error") {
        REQUIRE_THROWS_AS(diffusim::diffuse({}, own), std::invalid_argument);
    }
}

TEST_CASE("combine gates the network inflow") {
    const auto tf = Transform::identity(2);
    Vec psi(2), omega(2);
    psi << 10, 20;
    omega << 1, 2;
    REQUIRE(diffusim::combine(psi, omega, ObservabilityMask::zeros(2), 0.3, tf) == omega);
    REQUIRE(diffusim::combine(psi, omega, ObservabilityMask::ones(2), 1.0, tf) == omega);
    REQUIRE(diffusim::combine(psi, omega, ObservabilityMask::ones(2), 0.0, tf) == psi);
}

TEST_CASE("single fully observable node converges like plain LMS") {
    const int len = 8;
    const double mu = 0.05;
    FlowGates gates{0.5, 0.0, 1000, 0.0, 0.5};
    auto b = make_bench(1, len, 1.0, 1.0, true, mu, 0.0, gates, ThresholdSchedule{2.0, 0.25, 200.0},
                        7);
    // Oracle: the adaptation module alone, fed from an identical stream.
    const std::uint64_t rep = diffusim::rep_seed(7, 0);
    auto rng = diffusim::node_stream(rep, 0);
    Vec est = Vec::Zero(len);
    for (long t = 1; t <= 2000; ++t) {
        b->step(t);
        est = diffusim::adapt(est, diffusim::draw_measurement(b->target, b->lms, rng), mu);
        REQUIRE(b->states[0].omega_tilde == est);
    }
    REQUIRE((b->states[0].omega - b->target).norm() < 1e-3);
    REQUIRE((est - b->target).norm() < 1e-3);
}

TEST_CASE("alpha=1 with full known supports reproduces isolated filters exactly") {
    const int n = 4, len = 8;
    const double mu = 0.05, sigma = 0.01;
    FlowGates closed{0.5, 1.0, 150, 0.0, 1.0};
    auto b = make_bench(n, len, 0.8, 1.0, true, mu, sigma, closed,
                        ThresholdSchedule{2.0, 0.25, 50.0}, 11,
                        diffusim::SupportPolicy::TrueMask);

    const std::uint64_t rep = diffusim::rep_seed(11, 0);
    std::vector<std::mt19937_64> oracle_rngs;
    std::vector<Vec> oracle(static_cast<std::size_t>(n), Vec::Zero(len));
    for (int i = 0; i < n; ++i) oracle_rngs.push_back(diffusim::node_stream(rep, i));

    for (long t = 1; t <= 300; ++t) {
        b->step(t);
        for (int i = 0; i < n; ++i) {
            const auto meas = diffusim::draw_measurement(b->masked_targets[static_cast<std::size_t>(i)],
                                                         b->lms,
                                                         oracle_rngs[static_cast<std::size_t>(i)]);
            oracle[static_cast<std::size_t>(i)] =
                diffusim::adapt(oracle[static_cast<std::size_t>(i)], meas, mu);
        }
        for (int i = 0; i < n; ++i)
            REQUIRE(b->states[static_cast<std::size_t>(i)].omega ==
                    oracle[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("the inner chain never incorporates network information") {
    const int n = 5, len = 8;
    const double mu = 0.05, sigma = 0.01;
    FlowGates open{0.5, 0.0, 100, 0.0, 0.5};
    auto b = make_bench(n, len, 0.7, 0.5, false, mu, sigma, open,
                        ThresholdSchedule{2.0, 0.25, 40.0}, 19);

    const std::uint64_t rep = diffusim::rep_seed(19, 0);
    std::vector<std::mt19937_64> oracle_rngs;
    std::vector<Vec> oracle(static_cast<std::size_t>(n), Vec::Zero(len));
    for (int i = 0; i < n; ++i) oracle_rngs.push_back(diffusim::node_stream(rep, i));

    for (long t = 1; t <= 200; ++t) {
        b->step(t);
        for (int i = 0; i < n; ++i) {
            const auto meas = diffusim::draw_measurement(b->masked_targets[static_cast<std::size_t>(i)],
                                                         b->lms,
                                                         oracle_rngs[static_cast<std::size_t>(i)]);
            oracle[static_cast<std::size_t>(i)] =
                diffusim::adapt(oracle[static_cast<std::size_t>(i)], meas, mu);
            REQUIRE(b->states[static_cast<std::size_t>(i)].omega_tilde ==
                    oracle[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("eta=0 from a zero start leaves the diffusion buffers at zero") {
    FlowGates muted{0.0, 0.0, 100, 0.0, 0.5};
    auto b = make_bench(5, 8, 0.7, 0.5, false, 0.05, 0.01, muted,
                        ThresholdSchedule{2.0, 0.25, 50.0}, 13);
    for (long t = 1; t <= 200; ++t) {
        b->step(t);
        for (const auto& st : b->states) REQUIRE(st.psi.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("step_network does not depend on the processing order") {
    FlowGates gates{0.5, 0.0, 100, 0.0, 0.5};
    auto a = make_bench(6, 8, 0.6, 0.5, false, 0.05, 0.01, gates,
                        ThresholdSchedule{2.0, 0.25, 40.0}, 17);
    auto b = make_bench(6, 8, 0.6, 0.5, false, 0.05, 0.01, gates,
                        ThresholdSchedule{2.0, 0.25, 40.0}, 17);

    std::vector<int> reversed(6);
    std::iota(reversed.begin(), reversed.end(), 0);
    std::reverse(reversed.begin(), reversed.end());

    for (long t = 1; t <= 150; ++t) {
        diffusim::step_network(a->states, a->ctx, t, a->rngs);
        diffusim::step_network(b->states, b->ctx, t, b->rngs, reversed);
        for (int i = 0; i < 6; ++i) {
            REQUIRE(a->states[static_cast<std::size_t>(i)].omega ==
                    b->states[static_cast<std::size_t>(i)].omega);
            REQUIRE(a->states[static_cast<std::size_t>(i)].psi ==
                    b->states[static_cast<std::size_t>(i)].psi);
            REQUIRE(a->states[static_cast<std::size_t>(i)].support ==
                    b->states[static_cast<std::size_t>(i)].support);
        }
    }
}

TEST_CASE("repetitions are bit-reproducible") {
    diffusim::ScenarioConfig cfg;
    cfg.n_nodes = 6;
    cfg.vec_len = 8;
    cfg.horizon = 120;
    cfg.gates.switch_time = 60;
    cfg.schedule.tau = 30.0;
    cfg.reps = 2;
    cfg.seed = 99;

    const auto a = diffusim::run_repetition(cfg, diffusim::rep_seed(cfg.seed, 0));
    const auto b = diffusim::run_repetition(cfg, diffusim::rep_seed(cfg.seed, 0));
    REQUIRE(std::memcmp(a.local.data(), b.local.data(),
                        sizeof(double) * static_cast<std::size_t>(a.local.size())) == 0);
    REQUIRE(std::memcmp(a.consensus.data(), b.consensus.data(),
                        sizeof(double) * static_cast<std::size_t>(a.consensus.size())) == 0);

    const auto ta = diffusim::run_simulation(cfg);
    const auto tb = diffusim::run_simulation(cfg);
    REQUIRE(std::memcmp(ta.consensus_msd_db.data(), tb.consensus_msd_db.data(),
                        sizeof(double) * static_cast<std::size_t>(ta.consensus_msd_db.size())) == 0);
    REQUIRE(std::memcmp(ta.local_msd_db.data(), tb.local_msd_db.data(),
                        sizeof(double) * static_cast<std::size_t>(ta.local_msd_db.size())) == 0);
}

TEST_CASE("zero horizon yields an empty trace") {
    diffusim::ScenarioConfig cfg;
    cfg.n_nodes = 3;
    cfg.vec_len = 4;
    cfg.horizon = 0;
    cfg.gates.switch_time = 0;
    cfg.reps = 1;
    const auto trace = diffusim::run_simulation(cfg);
    REQUIRE(trace.horizon == 0);
    REQUIRE(trace.consensus_msd_db.size() == 0);
}

TEST_CASE("averaging identical repetitions is the identity") {
    diffusim::ScenarioConfig cfg;
    cfg.n_nodes = 4;
    cfg.vec_len = 8;
    cfg.horizon = 60;
    cfg.gates.switch_time = 30;
    cfg.reps = 1;
    cfg.seed = 5;

    const auto rep = diffusim::run_repetition(cfg, diffusim::rep_seed(cfg.seed, 0));
    const auto one = diffusim::average_traces({rep});
    const auto two = diffusim::average_traces({rep, rep});
    REQUIRE(one.consensus_msd_db == two.consensus_msd_db);
    REQUIRE(one.local_msd_db == two.local_msd_db);
}

TEST_CASE("disconnected topologies are reported after the retry cap") {
    diffusim::ScenarioConfig cfg;
    cfg.n_nodes = 4;
    cfg.vec_len = 4;
    cfg.link_prob = 0.0;
    cfg.horizon = 1;
    cfg.gates.switch_time = 0;
    cfg.reps = 1;
    REQUIRE_THROWS_AS(diffusim::run_simulation(cfg), diffusim::NumericError);
}

TEST_CASE("estimated supports settle on the true masks") {
    const int n = 8, len = 16;
    const long horizon = 500;
    int good_runs = 0;
    for (int run = 0; run < 10; ++run) {
        FlowGates open{0.5, 0.0, 250, 0.0, 0.5};
        auto b = make_bench(n, len, 0.5, 0.5, false, 0.05, 1e-3, open,
                            ThresholdSchedule{2.0, 0.25, 60.0},
                            diffusim::derive_seed(400, static_cast<std::uint64_t>(run)));

        long t_conv = -1;
        bool all_match_after = true;
        for (long t = 1; t <= horizon; ++t) {
            b->step(t);
            if (t_conv < 0) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    acc += diffusim::local_msd(b->states[static_cast<std::size_t>(i)].omega_tilde,
                                               b->masked_targets[static_cast<std::size_t>(i)],
                                               b->masks[static_cast<std::size_t>(i)]);
                if (acc / n < 1e-2) t_conv = t;
            } else if (t >= 3 * t_conv) {
                for (int i = 0; i < n; ++i)
                    if (!(b->states[static_cast<std::size_t>(i)].support ==
                          b->masks[static_cast<std::size_t>(i)]))
                        all_match_after = false;
            }
        }
        if (t_conv > 0 && 3 * t_conv < horizon && all_match_after) ++good_runs;
    }
    REQUIRE(good_runs >= 9);
}
