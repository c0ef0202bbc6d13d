#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "diffusim/metrics.hpp"
#include "diffusim/rng.hpp"

using diffusim::Mat;
using diffusim::MsdTrace;
using diffusim::ObservabilityMask;
using diffusim::RepTrace;
using diffusim::Vec;

TEST_CASE("local MSD basics") {
    SECTION("perfect estimate scores zero") {
        Vec t(3);
        t << 1, 2, 3;
        REQUIRE(diffusim::local_msd(t, t, ObservabilityMask::ones(3)) == 0.0);
    }
    SECTION("full mask gives plain MSD") {
        Vec est(2), tgt(2);
        est << 1.0, 1.0;
        tgt << 0.0, 0.0;
        REQUIRE(diffusim::local_msd(est, tgt, ObservabilityMask::ones(2)) ==
                Catch::Approx(1.0).epsilon(1e-14));
    }
    SECTION("normalization rescales by the observability fraction") {
        Vec est(2), tgt(2);
        est << 0.1, 0.0;
        tgt << 0.0, 0.0;
        REQUIRE(diffusim::local_msd(est, tgt, ObservabilityMask({1, 0})) ==
                Catch::Approx(0.01).epsilon(1e-12));
    }
    SECTION("all-zero mask is rejected") {
        REQUIRE_THROWS_AS(diffusim::local_msd(Vec::Zero(2), Vec::Zero(2),
                                              ObservabilityMask::zeros(2)),
                          diffusim::NumericError);
    }
}

TEST_CASE("consensus MSD basics") {
    Vec target(4);
    target << 1, -1, 2, 0;
    SECTION("all nodes on target score zero") {
        REQUIRE(diffusim::consensus_msd({target, target}, target) == 0.0);
    }
    SECTION("single node reduces to its unnormalized MSD") {
        Vec est = target;
        est[0] += 2.0;
        REQUIRE(diffusim::consensus_msd({est}, target) == Catch::Approx(1.0).epsilon(1e-14));
    }
    SECTION("zero estimates score about the target component variance") {
        const int len = 64;
        std::mt19937_64 rng(91);
        std::uniform_real_distribution<double> mag(0.5, 1.5);
        std::uniform_int_distribution<int> sign(0, 1);
        const double sigma0_sq = (1.5 * 1.5 * 1.5 - 0.5 * 0.5 * 0.5) / 3.0;
        double acc = 0.0;
        for (int draw = 0; draw < 100; ++draw) {
            Vec t(len);
            for (int i = 0; i < len; ++i) t[i] = sign(rng) ? mag(rng) : -mag(rng);
            acc += diffusim::consensus_msd({Vec::Zero(len)}, t);
        }
        acc /= 100.0;
        REQUIRE(acc == Catch::Approx(sigma0_sq).epsilon(0.10));
    }
}

TEST_CASE("dB conversion") {
    bool clamped = true;
    REQUIRE(diffusim::to_db(1.0, &clamped) == 0.0);
    REQUIRE_FALSE(clamped);
    REQUIRE(diffusim::to_db(0.01) == Catch::Approx(-20.0).margin(1e-12));
    REQUIRE(diffusim::to_db(0.0, &clamped) == diffusim::kDbFloor);
    REQUIRE(clamped);
}

TEST_CASE("trace averaging") {
    RepTrace a;
    a.local.resize(1, 1);
    a.local(0, 0) = 0.04;
    a.consensus.resize(1);
    a.consensus[0] = 0.04;

    RepTrace b = a;
    b.local(0, 0) = 0.16;
    b.consensus[0] = 0.16;

    SECTION("a single trace converts to its own dB") {
        const MsdTrace out = diffusim::average_traces({a});
        REQUIRE(out.consensus_msd_db[0] == Catch::Approx(10.0 * std::log10(0.04)).margin(1e-12));
        REQUIRE(out.reps == 1);
    }
    SECTION("identical traces average to themselves") {
        const MsdTrace one = diffusim::average_traces({a});
        const MsdTrace two = diffusim::average_traces({a, a});
        const MsdTrace four = diffusim::average_traces({a, a, a, a});
        REQUIRE(one.consensus_msd_db[0] == two.consensus_msd_db[0]);
        REQUIRE(one.local_msd_db(0, 0) == two.local_msd_db(0, 0));
        REQUIRE(one.consensus_msd_db[0] == four.consensus_msd_db[0]);
        const MsdTrace three = diffusim::average_traces({a, a, a});
        REQUIRE(three.consensus_msd_db[0] ==
                Catch::Approx(one.consensus_msd_db[0]).epsilon(1e-12));
    }
    SECTION("averaging happens in linear scale") {
        const MsdTrace out = diffusim::average_traces({a, b});
        REQUIRE(out.consensus_msd_db[0] ==
                Catch::Approx(10.0 * std::log10((0.04 + 0.16) / 2.0)).margin(1e-12));
    }
    SECTION("shape mismatch is rejected") {
        RepTrace c;
        c.local.resize(2, 1);
        c.consensus.resize(1);
        REQUIRE_THROWS_AS(diffusim::average_traces({a, c}), std::invalid_argument);
    }
}

TEST_CASE("normalized local MSD of the zero estimator is insensitive to the mask density") {
    const int len = 64;
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::uniform_int_distribution<int> sign(0, 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    auto mean_for_rho = [&](double rho, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        double acc = 0.0;
        int kept = 0;
        for (int draw = 0; draw < 200; ++draw) {
            Vec t(len);
            for (int i = 0; i < len; ++i) t[i] = sign(rng) ? mag(rng) : -mag(rng);
            std::vector<std::uint8_t> bits(len);
            int count = 0;
            for (int i = 0; i < len; ++i) {
                bits[static_cast<std::size_t>(i)] = u(rng) < rho ? 1 : 0;
                count += bits[static_cast<std::size_t>(i)];
            }
            if (count == 0) continue;
            const ObservabilityMask m(bits);
            Vec masked = t;
            for (int i = 0; i < len; ++i)
                if (!bits[static_cast<std::size_t>(i)]) masked[i] = 0.0;
            acc += diffusim::local_msd(Vec::Zero(len), masked, m);
            ++kept;
        }
        return acc / kept;
    };

    const double at_low = mean_for_rho(0.25, 1001);
    const double at_high = mean_for_rho(0.9, 1002);
    REQUIRE(at_low == Catch::Approx(at_high).epsilon(0.15));
}
