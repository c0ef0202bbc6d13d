#pragma once

#include <vector>

#include "diffusim/common.hpp"
#include "diffusim/transforms.hpp"

namespace diffusim {

// Combination-weight solvers for one transform-domain component shared by m
// neighboring estimators. Node k sees the component attenuated by d_k and
// carries estimation noise of variance sigma_k^2 = sigma0_sq / lambda_sq[k];
// the combined estimate sum_k c_k (d_k w + e_k) is optimized for mean squared
// deviation from w. The minimizing weights solve
//
//     [ d_k d_l + delta_{kl} / lambda_l^2 ] c = d,
//
// a diagonal-plus-rank-one system, so it admits a closed form via the
// Sherman-Morrison identity.

struct ComponentProblem {
    Vec d;              // observability gains d_k >= 0
    Vec lambda_sq;      // per-node SNR lambda_k^2 > 0 (sigma0^2 / sigma_k^2)
    double sigma0_sq = 1.0;

    int size() const { return static_cast<int>(d.size()); }

    void validate() const {
        require(d.size() == lambda_sq.size(), "d and lambda_sq must have equal length");
        require(d.size() >= 1, "problem must have m >= 1");
        require(sigma0_sq > 0.0, "sigma0_sq must be > 0");
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            require(d[i] >= 0.0, "observability gains must be >= 0");
            require(lambda_sq[i] > 0.0, "lambda_sq entries must be > 0");
        }
    }
};

/// (sum_k c_k d_k - 1)^2 sigma0^2 + sum_k c_k^2 sigma_k^2.
inline double subproblem_cost(const ComponentProblem& p, const Vec& c) {
    p.validate();
    require(c.size() == p.d.size(), "weight vector length mismatch");
    const double combo = c.dot(p.d) - 1.0;
    double noise = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k)
        noise += c[k] * c[k] * (p.sigma0_sq / p.lambda_sq[k]);
    return combo * combo * p.sigma0_sq + noise;
}

/// Closed-form optimum c_l = d_l lambda_l^2 / (1 + sum_k d_k^2 lambda_k^2),
/// with c_l = 0 wherever d_l = 0.
inline Vec optimal_weights_closed_form(const ComponentProblem& p) {
    p.validate();
    double s = 0.0;
    for (Eigen::Index k = 0; k < p.d.size(); ++k) s += p.d[k] * p.d[k] * p.lambda_sq[k];
    Vec c(p.d.size());
    for (Eigen::Index l = 0; l < p.d.size(); ++l)
        c[l] = p.d[l] == 0.0 ? 0.0 : p.d[l] * p.lambda_sq[l] / (1.0 + s);
    return c;
}

/// Dense direct solve of the same system (zero-d indices dropped, solved on
/// the nonzero subset, zeros reinserted). Serves as the standard-method
/// counterpart to the closed form.
inline Vec optimal_weights_direct(const ComponentProblem& p) {
    p.validate();
    std::vector<Eigen::Index> live;
    for (Eigen::Index k = 0; k < p.d.size(); ++k)
        if (p.d[k] != 0.0) live.push_back(k);

    Vec c = Vec::Zero(p.d.size());
    if (live.empty()) return c;

    const int m = static_cast<int>(live.size());
    Mat sys(m, m);
    Vec rhs(m);
    for (int a = 0; a < m; ++a) {
        const double da = p.d[live[static_cast<std::size_t>(a)]];
        rhs[a] = da;
        for (int b = 0; b < m; ++b)
            sys(a, b) = da * p.d[live[static_cast<std::size_t>(b)]];
        sys(a, a) += 1.0 / p.lambda_sq[live[static_cast<std::size_t>(a)]];
    }
    Vec sol = sys.ldlt().solve(rhs);
    if ((sys * sol - rhs).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
        throw NumericError("optimal weights: dense system did not solve");
    for (int a = 0; a < m; ++a) c[live[static_cast<std::size_t>(a)]] = sol[a];
    return c;
}

/// Assembles (Lambda + 1 d')^{-1} explicitly through the Sherman-Morrison
/// identity and applies it to the all-ones right-hand side. Third route,
/// kept independent of the closed form for cross-checks.
inline Vec optimal_weights_sherman_morrison(const ComponentProblem& p) {
    p.validate();
    std::vector<Eigen::Index> live;
    for (Eigen::Index k = 0; k < p.d.size(); ++k)
        if (p.d[k] != 0.0) live.push_back(k);

    Vec c = Vec::Zero(p.d.size());
    if (live.empty()) return c;

    const int m = static_cast<int>(live.size());
    Vec d(m), lam_inv(m);  // lam_inv = Lambda^{-1} diagonal = d_l lambda_l^2
    for (int a = 0; a < m; ++a) {
        d[a] = p.d[live[static_cast<std::size_t>(a)]];
        lam_inv[a] = d[a] * p.lambda_sq[live[static_cast<std::size_t>(a)]];
    }
    Mat inv = lam_inv.asDiagonal();
    const double denom = 1.0 + d.dot(lam_inv);  // 1 + d' Lambda^{-1} 1
    inv -= (lam_inv * (d.cwiseProduct(lam_inv)).transpose()) / denom;
    Vec sol = inv * Vec::Ones(m);
    for (int a = 0; a < m; ++a) c[live[static_cast<std::size_t>(a)]] = sol[a];
    return c;
}

/// Equal observability d_k = d0: c_l = d0 lambda_l^2 / (1 + d0^2 sum lambda_k^2).
inline Vec optimal_weights_equal_observability(double d0, const Vec& lambda_sq) {
    require(d0 > 0.0, "d0 must be > 0");
    require(lambda_sq.size() >= 1, "lambda_sq must be nonempty");
    const double denom = 1.0 + d0 * d0 * lambda_sq.sum();
    return (d0 / denom) * lambda_sq;
}

// Conventional combination: one scalar weight per neighbor, shared by all L
// components, found from (Lambda~ + sum_j d_j d_j') g = sum_j d_j with
// Lambda~ = L diag(lambda^{-2}).

struct ScalarWeightProblem {
    std::vector<Vec> d_vectors;  // one length-m observability vector per component
    Vec lambda_sq;               // per-node SNR, length m

    int components() const { return static_cast<int>(d_vectors.size()); }
    int nodes() const { return static_cast<int>(lambda_sq.size()); }

    void validate() const {
        require(!d_vectors.empty(), "need at least one component");
        require(lambda_sq.size() >= 1, "need at least one node");
        for (const auto& dj : d_vectors) {
            require(dj.size() == lambda_sq.size(), "component vector length mismatch");
            for (Eigen::Index k = 0; k < dj.size(); ++k)
                require(dj[k] >= 0.0, "observability entries must be >= 0");
        }
        for (Eigen::Index k = 0; k < lambda_sq.size(); ++k)
            require(lambda_sq[k] > 0.0, "lambda_sq entries must be > 0");
    }
};

/// sum_j d_j d_j'; entry (x,y) is the inner product of node x's and node y's
/// observability vectors across components (cooperation of x and y).
inline Mat cooperation_matrix(const ScalarWeightProblem& p) {
    p.validate();
    const int m = p.nodes();
    Mat coop = Mat::Zero(m, m);
    for (const auto& dj : p.d_vectors) coop += dj * dj.transpose();
    return coop;
}

/// S_L = (Lambda~ + sum_j d_j d_j')^{-1} built by rank-one Sherman-Morrison
/// updates starting from S_0 = Lambda~^{-1}, one update per component.
inline Mat conventional_system_inverse(const ScalarWeightProblem& p) {
    p.validate();
    const int m = p.nodes();
    const double len = static_cast<double>(p.components());
    Mat s = Mat::Zero(m, m);
    for (int k = 0; k < m; ++k) s(k, k) = p.lambda_sq[k] / len;

    for (const auto& dj : p.d_vectors) {
        const Vec sd = s * dj;
        const double denom = 1.0 + dj.dot(sd);
        if (!(std::abs(denom) > 1e-300)) throw NumericError("scalar weights: degenerate update");
        s -= (sd * sd.transpose()) / denom;
    }
    return s;
}

/// Scalar combination weights g = S_L sum_j d_j.
inline Vec conventional_scalar_weights(const ScalarWeightProblem& p) {
    const Mat s = conventional_system_inverse(p);
    Vec rhs = Vec::Zero(p.nodes());
    for (const auto& dj : p.d_vectors) rhs += dj;
    return s * rhs;
}

/// Per-component optimal diagonal combiners for one node's neighborhood:
/// gains[k][j] weights neighbor k's component j. Components observed by no
/// neighborhood member get all-zero weights.
inline std::vector<Vec> per_component_gains(const std::vector<ObservabilityMask>& masks,
                                            const Vec& lambda_sq) {
    require(!masks.empty(), "neighborhood must be nonempty");
    require(static_cast<Eigen::Index>(masks.size()) == lambda_sq.size(),
            "one lambda_sq entry per neighborhood member required");
    const int m = static_cast<int>(masks.size());
    const int len = masks.front().size();
    for (const auto& mk : masks) require(mk.size() == len, "mask length mismatch");

    std::vector<Vec> gains(static_cast<std::size_t>(m), Vec::Zero(len));
    ComponentProblem sub;
    sub.d.resize(m);
    sub.lambda_sq = lambda_sq;
    for (int j = 0; j < len; ++j) {
        for (int k = 0; k < m; ++k)
            sub.d[k] = masks[static_cast<std::size_t>(k)].diag[static_cast<std::size_t>(j)];
        const Vec c = optimal_weights_closed_form(sub);
        for (int k = 0; k < m; ++k) gains[static_cast<std::size_t>(k)][j] = c[k];
    }
    return gains;
}

}  // namespace diffusim
