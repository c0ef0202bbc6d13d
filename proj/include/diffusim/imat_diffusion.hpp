#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "diffusim/common.hpp"
#include "diffusim/lms.hpp"
#include "diffusim/topology.hpp"
#include "diffusim/transforms.hpp"

namespace diffusim {

// Thresholding-based diffusion: each node adapts locally, thresholds its
// transform-domain estimate to decide which components it can vouch for,
// pushes those into a shared buffer (outflow gate eta), averages buffers
// across the neighborhood per active component, and blends the fused buffer
// back into its own estimate (inflow gate alpha).

/// beta(t) = beta1 exp(-t/tau) + beta0; nonincreasing, floored at beta0.
struct ThresholdSchedule {
    double beta1 = 2.0;
    double beta0 = 0.25;
    double tau = 500.0;

    double level(long t) const { return beta1 * std::exp(-static_cast<double>(t) / tau) + beta0; }

    void validate() const {
        require(beta1 >= 0.0, "beta1 must be >= 0");
        require(beta0 >= 0.0, "beta0 must be >= 0");
        require(tau > 0.0, "tau must be > 0");
    }
};

inline double threshold_level(const ThresholdSchedule& s, long t) {
    require(t >= 0, "threshold time must be >= 0");
    return s.level(t);
}

/// Step-function flow gates: (eta, alpha) before switch_time, then
/// (eta_after, alpha_after) at and after it. eta = 0 closes the outflow;
/// alpha = 1 keeps the node's own observed components purely local.
struct FlowGates {
    double eta = 0.5;
    double alpha = 0.0;
    long switch_time = 2500;
    double eta_after = 0.0;
    double alpha_after = 0.1;

    double eta_at(long t) const { return t < switch_time ? eta : eta_after; }
    double alpha_at(long t) const { return t < switch_time ? alpha : alpha_after; }

    void validate(long horizon) const {
        require(eta >= 0.0 && eta <= 1.0, "eta must be in [0,1]");
        require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0,1]");
        require(eta_after >= 0.0 && eta_after <= 1.0, "eta_after must be in [0,1]");
        require(alpha_after >= 0.0 && alpha_after <= 1.0, "alpha_after must be in [0,1]");
        require(switch_time >= 0 && switch_time <= horizon, "switch_time must be in [0, horizon]");
    }
};

struct NodeState {
    Vec omega;                 // time-domain combined estimate (the node's output)
    Vec omega_tilde;           // time-domain inner estimate: the adaptive chain itself
    Vec psi;                   // transform-domain diffusion buffer
    Vec omega_big;             // transform-domain adapted inner estimate
    ObservabilityMask support; // estimated own support
    ObservabilityMask valid;   // components of psi vouched somewhere reachable

    static NodeState zeros(int len) {
        NodeState s;
        s.omega = Vec::Zero(len);
        s.omega_tilde = Vec::Zero(len);
        s.psi = Vec::Zero(len);
        s.omega_big = Vec::Zero(len);
        s.support = ObservabilityMask::zeros(len);
        s.valid = ObservabilityMask::zeros(len);
        return s;
    }
};

/// Indicator of |x_j| > beta (strict).
inline ObservabilityMask estimate_support(const Vec& omega_big, double beta) {
    require(beta >= 0.0, "beta must be >= 0");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(omega_big.size()));
    for (Eigen::Index j = 0; j < omega_big.size(); ++j)
        bits[static_cast<std::size_t>(j)] = std::abs(omega_big[j]) > beta ? 1 : 0;
    return ObservabilityMask(std::move(bits));
}

/// psi <- D((1-eta) psi + eta Omega) + (I-D) psi: on-support components move
/// toward the node's fresh estimate, off-support buffer entries persist.
inline Vec local_update(const Vec& psi, const Vec& omega_big, const ObservabilityMask& support,
                        double eta) {
    require(psi.size() == omega_big.size(), "local_update: length mismatch");
    require(support.size() == psi.size(), "local_update: mask length mismatch");
    require(eta >= 0.0 && eta <= 1.0, "eta must be in [0,1]");
    Vec out = psi;
    for (Eigen::Index j = 0; j < psi.size(); ++j)
        if (support.diag[static_cast<std::size_t>(j)])
            out[j] = (1.0 - eta) * psi[j] + eta * omega_big[j];
    return out;
}

struct NeighborShare {
    const Vec* psi = nullptr;
    const ObservabilityMask* support = nullptr;
};

/// Per-component average of the buffers of neighbors whose support bit is
/// set; components no neighbor vouches for keep the node's own buffer value.
inline Vec diffuse(const std::vector<NeighborShare>& neighborhood, const Vec& own_psi) {
    require(!neighborhood.empty(), "diffuse: neighborhood must be nonempty");
    for (const auto& n : neighborhood) {
        require(n.psi && n.support, "diffuse: null neighbor entry");
        require(n.psi->size() == own_psi.size(), "diffuse: length mismatch");
        require(n.support->size() == own_psi.size(), "diffuse: mask length mismatch");
    }
    Vec out(own_psi.size());
    for (Eigen::Index j = 0; j < own_psi.size(); ++j) {
        double sum = 0.0;
        int active = 0;
        for (const auto& n : neighborhood) {
            if (n.support->diag[static_cast<std::size_t>(j)]) {
                sum += (*n.psi)[j];
                ++active;
            }
        }
        out[j] = active > 0 ? sum / active : own_psi[j];
    }
    return out;
}

/// omega <- T'[D((1-alpha) psi + alpha Omega) + (I-D) Omega]: on-support
/// components blend the fused network buffer with the local estimate,
/// off-support components stay local; the result returns to the time domain.
inline Vec combine(const Vec& psi, const Vec& omega_big, const ObservabilityMask& support,
                   double alpha, const Transform& tf) {
    require(psi.size() == omega_big.size(), "combine: length mismatch");
    require(support.size() == psi.size(), "combine: mask length mismatch");
    require(psi.size() == tf.size(), "combine: transform size mismatch");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0,1]");
    Vec blended = omega_big;
    for (Eigen::Index j = 0; j < psi.size(); ++j)
        if (support.diag[static_cast<std::size_t>(j)])
            blended[j] = (1.0 - alpha) * psi[j] + alpha * omega_big[j];
    return tf.inverse(blended);
}

/// Which mask drives the exchange gates: the thresholded estimate, or the
/// node's true observability (oracle and baseline configurations).
enum class SupportPolicy { Estimated, TrueMask };

/// Everything that stays fixed across the timesteps of one repetition.
struct NetworkContext {
    const NetworkGraph* graph = nullptr;
    const Transform* transform = nullptr;
    const std::vector<ObservabilityMask>* true_masks = nullptr;
    const std::vector<Vec>* masked_targets = nullptr;  // time-domain M_i omega_opt
    LmsParams lms;
    FlowGates gates;
    ThresholdSchedule schedule;
    SupportPolicy support_policy = SupportPolicy::Estimated;
};

/// One synchronous round over every node.
///
/// The adaptive chain is the inner estimate: each node adapts omega_tilde
/// against its own measurements only, so thresholding its transform always
/// detects the node's own support and the buffer pushes stay clean. Shared
/// per round are the post-local-update buffer psi, the thresholded support,
/// and a validity mask marking which psi components carry vouched
/// information (own support or anything received earlier). Diffusion
/// averages per component over the neighbors whose validity bit is set, so
/// vouched components flood hop by hop; relays forward averaged values
/// without ever writing their own adaptation noise into them. The combined
/// output blends the fused buffer with the inner estimate on the node's own
/// support (inflow gate alpha) and takes the fused buffer verbatim on
/// received components.
///
/// Neighbor reads come from the snapshot and every node draws from its own
/// stream, so the result does not depend on processing order (an explicit
/// order can be passed to verify exactly that).
inline void step_network(std::vector<NodeState>& states, const NetworkContext& ctx, long t,
                         std::span<std::mt19937_64> node_rngs,
                         std::span<const int> order = {}) {
    const int n = ctx.graph->size();
    const Eigen::Index len = ctx.transform->size();
    require(static_cast<int>(states.size()) == n, "step_network: one state per node required");
    require(static_cast<int>(node_rngs.size()) == n, "step_network: one rng per node required");
    require(static_cast<int>(ctx.true_masks->size()) == n, "step_network: one mask per node required");
    require(static_cast<int>(ctx.masked_targets->size()) == n,
            "step_network: one masked target per node required");
    require(order.empty() || static_cast<int>(order.size()) == n,
            "step_network: order must cover all nodes");

    const double beta = ctx.schedule.level(t);
    const double eta = ctx.gates.eta_at(t);
    const double alpha = ctx.gates.alpha_at(t);

    struct Share {
        Vec omega_big;
        Vec psi;
        ObservabilityMask support;
        ObservabilityMask active;  // support | previously valid
    };
    std::vector<Share> shares(static_cast<std::size_t>(n));

    auto node_at = [&](int k) { return order.empty() ? k : order[static_cast<std::size_t>(k)]; };

    for (int k = 0; k < n; ++k) {
        const int i = node_at(k);
        auto& st = states[static_cast<std::size_t>(i)];
        const Measurement meas = draw_measurement((*ctx.masked_targets)[static_cast<std::size_t>(i)],
                                                  ctx.lms, node_rngs[static_cast<std::size_t>(i)]);
        st.omega_tilde = adapt(st.omega_tilde, meas, ctx.lms.mu);
        Share& sh = shares[static_cast<std::size_t>(i)];
        sh.omega_big = ctx.transform->forward(st.omega_tilde);
        sh.support = ctx.support_policy == SupportPolicy::Estimated
                         ? estimate_support(sh.omega_big, beta)
                         : (*ctx.true_masks)[static_cast<std::size_t>(i)];
        sh.psi = local_update(st.psi, sh.omega_big, sh.support, eta);
        sh.active = sh.support;
        for (Eigen::Index c = 0; c < len; ++c)
            sh.active.diag[static_cast<std::size_t>(c)] |=
                st.valid.diag[static_cast<std::size_t>(c)];
    }

    // Synchronous exchange: everyone reads the post-local-update snapshot.
    for (int k = 0; k < n; ++k) {
        const int i = node_at(k);
        const auto& sh = shares[static_cast<std::size_t>(i)];
        const auto hood = ctx.graph->neighbors(i);

        std::vector<NeighborShare> inputs;
        inputs.reserve(hood.size());
        std::vector<std::uint8_t> vouched(static_cast<std::size_t>(len), 0);
        for (int j : hood) {
            const auto& nj = shares[static_cast<std::size_t>(j)];
            inputs.push_back({&nj.psi, &nj.active});
            for (Eigen::Index c = 0; c < len; ++c)
                vouched[static_cast<std::size_t>(c)] |= nj.active.diag[static_cast<std::size_t>(c)];
        }

        const Vec fused = diffuse(inputs, sh.psi);

        // Output assembly: own support blends by alpha, received components
        // take the fused buffer, everything else stays with the inner chain.
        Vec blended = sh.omega_big;
        for (Eigen::Index c = 0; c < len; ++c) {
            if (sh.support.diag[static_cast<std::size_t>(c)])
                blended[c] = (1.0 - alpha) * fused[c] + alpha * sh.omega_big[c];
            else if (vouched[static_cast<std::size_t>(c)])
                blended[c] = fused[c];
        }

        auto& st = states[static_cast<std::size_t>(i)];
        st.omega = ctx.transform->inverse(blended);
        st.psi = fused;
        st.omega_big = sh.omega_big;
        st.support = sh.support;
        st.valid = ObservabilityMask(std::move(vouched));
    }
}

}  // namespace diffusim
