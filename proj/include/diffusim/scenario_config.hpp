#pragma once

#include <cstdint>
#include <string>

#include "diffusim/common.hpp"
#include "diffusim/imat_diffusion.hpp"
#include "diffusim/transforms.hpp"

namespace diffusim {

enum class Strategy {
    ConventionalAveraging,
    ImatFixedThreshold,
    ImatAdaptive,
    OracleOptimalWeights,
    NoCooperation,
};

enum class Observability { Partial, Full };

/// Transform-domain target components: sign-symmetric magnitudes drawn
/// uniformly from [lo, hi], bounded away from zero so a fixed floor
/// threshold below lo separates signal from residual.
struct TargetGen {
    double lo = 0.5;
    double hi = 1.5;

    /// Component variance of the generated target, sigma0^2.
    double sigma0_sq() const { return (hi * hi * hi - lo * lo * lo) / (3.0 * (hi - lo)); }
};

struct ScenarioConfig {
    int n_nodes = 20;
    int vec_len = 64;
    double link_prob = 0.3;
    double obs_prob = 0.5;
    TransformKind transform = TransformKind::Identity;
    double mu = 0.01;
    double noise_sigma = 0.01;
    long horizon = 5000;
    FlowGates gates;               // eta/alpha step change at gates.switch_time
    ThresholdSchedule schedule;
    Strategy strategy = Strategy::ImatAdaptive;
    int reps = 20;
    std::uint64_t seed = 1;
    TargetGen target;
    Observability observability = Observability::Partial;

    // Set when the seed key was present in the parsed file; only used for
    // override precedence, never part of config equality.
    bool seed_from_file = false;

    void validate() const {
        if (n_nodes < 1) throw ConfigError("n_nodes", "must be >= 1");
        if (vec_len < 1) throw ConfigError("vec_len", "must be >= 1");
        if (!(link_prob >= 0.0 && link_prob <= 1.0)) throw ConfigError("link_prob", "must be in [0,1]");
        if (!(obs_prob >= 0.0 && obs_prob <= 1.0)) throw ConfigError("obs_prob", "must be in [0,1]");
        if (!(mu > 0.0)) throw ConfigError("mu", "must be > 0");
        if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma", "must be >= 0");
        if (horizon < 0) throw ConfigError("horizon", "must be >= 0");
        if (reps < 1) throw ConfigError("reps", "must be >= 1");
        if (!(target.lo > 0.0)) throw ConfigError("target_lo", "must be > 0");
        if (!(target.hi >= target.lo)) throw ConfigError("target_hi", "must be >= target_lo");
        try {
            gates.validate(horizon);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("switch_time", e.what());
        }
        try {
            schedule.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("beta1", e.what());
        }
        if (strategy == Strategy::OracleOptimalWeights && !(noise_sigma > 0.0))
            throw ConfigError("noise_sigma",
                              "oracle_optimal_weights needs noise_sigma > 0 for finite SNR weights");
    }

    bool operator==(const ScenarioConfig& o) const {
        return n_nodes == o.n_nodes && vec_len == o.vec_len && link_prob == o.link_prob &&
               obs_prob == o.obs_prob && transform == o.transform && mu == o.mu &&
               noise_sigma == o.noise_sigma && horizon == o.horizon &&
               gates.eta == o.gates.eta && gates.alpha == o.gates.alpha &&
               gates.switch_time == o.gates.switch_time && gates.eta_after == o.gates.eta_after &&
               gates.alpha_after == o.gates.alpha_after && schedule.beta1 == o.schedule.beta1 &&
               schedule.beta0 == o.schedule.beta0 && schedule.tau == o.schedule.tau &&
               strategy == o.strategy && reps == o.reps && seed == o.seed &&
               target.lo == o.target.lo && target.hi == o.target.hi &&
               observability == o.observability;
    }
};

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::ConventionalAveraging: return "conventional_averaging";
        case Strategy::ImatFixedThreshold: return "imat_fixed_threshold";
        case Strategy::ImatAdaptive: return "imat_adaptive";
        case Strategy::OracleOptimalWeights: return "oracle_optimal_weights";
        case Strategy::NoCooperation: return "no_cooperation";
    }
    return "unknown";
}

inline const char* transform_name(TransformKind k) {
    return k == TransformKind::Identity ? "identity" : "dct";
}

inline const char* observability_name(Observability o) {
    return o == Observability::Partial ? "partial" : "full";
}

}  // namespace diffusim
