#pragma once

#include <random>

#include "diffusim/common.hpp"

namespace diffusim {

struct LmsParams {
    double mu = 0.01;          // adaptation rate
    double noise_sigma = 0.0;  // measurement noise std deviation

    void validate() const {
        require(mu > 0.0, "mu must be > 0");
        require(noise_sigma >= 0.0, "noise_sigma must be >= 0");
    }
};

struct Measurement {
    Vec regressor;    // a_t, i.i.d. standard normal components
    double observed;  // a_t . masked_target + noise
};

/// One scalar measurement of the node's masked target.
inline Measurement draw_measurement(const Vec& masked_target, const LmsParams& params,
                                    std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Measurement m;
    m.regressor.resize(masked_target.size());
    for (Eigen::Index i = 0; i < m.regressor.size(); ++i) m.regressor[i] = gauss(rng);
    m.observed = m.regressor.dot(masked_target) + params.noise_sigma * gauss(rng);
    return m;
}

/// Stochastic-gradient step: estimate + mu * (d - a.estimate) * a.
/// Zero error (or mu = 0) returns the estimate bitwise unchanged.
inline Vec adapt(const Vec& estimate, const Measurement& meas, double mu) {
    require(meas.regressor.size() == estimate.size(), "adapt: length mismatch");
    const double err = meas.observed - meas.regressor.dot(estimate);
    const double scale = mu * err;
    if (scale == 0.0) return estimate;
    return estimate + scale * meas.regressor;
}

}  // namespace diffusim
