#pragma once

#include <cmath>
#include <vector>

#include "diffusim/common.hpp"
#include "diffusim/transforms.hpp"

namespace diffusim {

inline constexpr double kDbFloor = -180.0;

/// 10 log10(x); nonpositive inputs clamp to the -180 dB floor and set the
/// flag so zero-error runs stay plottable.
inline double to_db(double x, bool* clamped = nullptr) {
    if (clamped) *clamped = false;
    if (!(x > 0.0)) {
        if (clamped) *clamped = true;
        return kDbFloor;
    }
    return 10.0 * std::log10(x);
}

/// Mean squared error against the node's masked target, rescaled by
/// L / sum_j D(j) so nodes with different observability fractions compare.
inline double local_msd(const Vec& estimate, const Vec& masked_target,
                        const ObservabilityMask& mask) {
    require(estimate.size() == masked_target.size(), "local_msd: length mismatch");
    require(mask.size() == estimate.size(), "local_msd: mask length mismatch");
    const int observed = mask.count();
    if (observed == 0) throw NumericError("local_msd: all-zero mask has undefined normalization");
    return (estimate - masked_target).squaredNorm() / static_cast<double>(observed);
}

/// (1/N) sum_i (1/L) ||omega_i - omega_opt||^2.
inline double consensus_msd(const std::vector<Vec>& estimates, const Vec& target) {
    require(!estimates.empty(), "consensus_msd: need at least one estimate");
    double acc = 0.0;
    for (const auto& est : estimates) {
        require(est.size() == target.size(), "consensus_msd: length mismatch");
        acc += (est - target).squaredNorm();
    }
    return acc / (static_cast<double>(estimates.size()) * static_cast<double>(target.size()));
}

/// One repetition's linear-scale series: local(i, t) per node, consensus(t).
struct RepTrace {
    Mat local;      // N x T
    Vec consensus;  // T
};

/// Monte Carlo averaged series in dB. Averaging happens in linear scale,
/// per (node, t), before the dB conversion.
struct MsdTrace {
    long horizon = 0;
    int reps = 0;
    Mat local_msd_db;      // N x T
    Vec consensus_msd_db;  // T
    long floor_hits = 0;   // entries clamped at the dB floor
};

inline MsdTrace average_traces(const std::vector<RepTrace>& traces) {
    require(!traces.empty(), "average_traces: need at least one trace");
    const auto rows = traces.front().local.rows();
    const auto cols = traces.front().local.cols();
    for (const auto& tr : traces) {
        require(tr.local.rows() == rows && tr.local.cols() == cols,
                "average_traces: local shape mismatch");
        require(tr.consensus.size() == cols, "average_traces: consensus shape mismatch");
    }

    Mat local_sum = Mat::Zero(rows, cols);
    Vec cons_sum = Vec::Zero(cols);
    for (const auto& tr : traces) {
        local_sum += tr.local;
        cons_sum += tr.consensus;
    }
    const double inv = 1.0 / static_cast<double>(traces.size());

    MsdTrace out;
    out.horizon = cols;
    out.reps = static_cast<int>(traces.size());
    out.local_msd_db.resize(rows, cols);
    out.consensus_msd_db.resize(cols);
    bool clamped = false;
    for (Eigen::Index t = 0; t < cols; ++t) {
        out.consensus_msd_db[t] = to_db(cons_sum[t] * inv, &clamped);
        out.floor_hits += clamped;
        for (Eigen::Index i = 0; i < rows; ++i) {
            out.local_msd_db(i, t) = to_db(local_sum(i, t) * inv, &clamped);
            out.floor_hits += clamped;
        }
    }
    return out;
}

}  // namespace diffusim
