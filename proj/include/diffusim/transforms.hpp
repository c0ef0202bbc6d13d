#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "diffusim/common.hpp"

namespace diffusim {

enum class TransformKind { Identity, Dct };

/// Per-node observability indicator: the diagonal of D in the transform
/// domain. Entries are strictly 0 or 1.
struct ObservabilityMask {
    std::vector<std::uint8_t> diag;

    ObservabilityMask() = default;

    explicit ObservabilityMask(std::vector<std::uint8_t> bits) : diag(std::move(bits)) {
        for (auto b : diag) require(b == 0 || b == 1, "mask entries must be 0 or 1");
    }

    static ObservabilityMask ones(int len) {
        return ObservabilityMask(std::vector<std::uint8_t>(static_cast<std::size_t>(len), 1));
    }
    static ObservabilityMask zeros(int len) {
        return ObservabilityMask(std::vector<std::uint8_t>(static_cast<std::size_t>(len), 0));
    }

    int size() const { return static_cast<int>(diag.size()); }

    int count() const {
        int c = 0;
        for (auto b : diag) c += b;
        return c;
    }

    bool operator==(const ObservabilityMask& o) const { return diag == o.diag; }
};

/// Orthonormal transform pair: y = T x (forward), x = T' y (inverse).
/// Identity is a no-op; Dct is the orthonormal DCT-II, applied as a
/// precomputed dense matrix (vector lengths here are small).
class Transform {
public:
    static Transform identity(int size) {
        require(size > 0, "transform size must be positive");
        Transform t;
        t.kind_ = TransformKind::Identity;
        t.size_ = size;
        return t;
    }

    static Transform dct(int size) {
        require(size > 0, "transform size must be positive");
        Transform t;
        t.kind_ = TransformKind::Dct;
        t.size_ = size;
        t.basis_ = dct_matrix(size);
        return t;
    }

    static Transform make(TransformKind kind, int size) {
        return kind == TransformKind::Identity ? identity(size) : dct(size);
    }

    TransformKind kind() const { return kind_; }
    int size() const { return size_; }

    Vec forward(const Vec& x) const {
        require(x.size() == size_, "forward: length mismatch");
        if (kind_ == TransformKind::Identity) return x;
        return basis_ * x;
    }

    Vec inverse(const Vec& y) const {
        require(y.size() == size_, "inverse: length mismatch");
        if (kind_ == TransformKind::Identity) return y;
        return basis_.transpose() * y;
    }

    /// T' diag(m) T x — the masked projection applied in the time domain.
    Vec apply_mask(const ObservabilityMask& m, const Vec& x) const {
        require(m.size() == size_, "apply_mask: mask length mismatch");
        require(x.size() == size_, "apply_mask: vector length mismatch");
        Vec y = forward(x);
        for (int i = 0; i < size_; ++i)
            if (!m.diag[static_cast<std::size_t>(i)]) y[i] = 0.0;
        return inverse(y);
    }

private:
    static Mat dct_matrix(int n) {
        Mat m(n, n);
        const double s0 = std::sqrt(1.0 / n);
        const double sk = std::sqrt(2.0 / n);
        for (int k = 0; k < n; ++k) {
            const double scale = (k == 0) ? s0 : sk;
            for (int j = 0; j < n; ++j)
                m(k, j) = scale * std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
        }
        return m;
    }

    TransformKind kind_ = TransformKind::Identity;
    int size_ = 0;
    Mat basis_;
};

}  // namespace diffusim
