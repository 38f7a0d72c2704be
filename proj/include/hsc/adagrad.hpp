#pragma once

// AdaGrad: accum += g^2; p -= lr * g / (sqrt(accum) + eps), element-wise.

#include <cmath>

#include "hsc/core.hpp"
#include "hsc/nn.hpp"

namespace hsc {

inline constexpr double kAdaGradEps = 1e-8;

// lr = 0 freezes the parameters exactly (accumulators still grow).
inline void adagrad_step(double* p, const double* g, double* accum, size_t n, double lr,
                         double eps = kAdaGradEps) {
    if (lr < 0.0) throw UsageError("adagrad_step: lr must be non-negative");
    for (size_t i = 0; i < n; ++i) {
        accum[i] += g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(accum[i]) + eps);
    }
}

inline void adagrad_step(Vec& p, const Vec& g, Vec& accum, double lr, double eps = kAdaGradEps) {
    if (p.size() != g.size() || p.size() != accum.size())
        throw ShapeError("adagrad_step: shape mismatch");
    adagrad_step(p.data(), g.data(), accum.data(), p.size(), lr, eps);
}

inline void adagrad_step(Matrix& p, const Matrix& g, Matrix& accum, double lr, double eps = kAdaGradEps) {
    if (!p.same_shape(g) || !p.same_shape(accum)) throw ShapeError("adagrad_step: shape mismatch");
    adagrad_step(p.a.data(), g.a.data(), accum.a.data(), p.a.size(), lr, eps);
}

// Accumulators for one MLP block, same shapes as the parameters.
struct AdaGradState {
    Mlp2Params accum;
    double eps = kAdaGradEps;

    static AdaGradState for_params(const Mlp2Params& p) { return AdaGradState{zeros_like(p), kAdaGradEps}; }
};

inline void adagrad_step(Mlp2Params& p, const Mlp2Params& g, AdaGradState& st, double lr) {
    adagrad_step(p.w1, g.w1, st.accum.w1, lr, st.eps);
    adagrad_step(p.b1, g.b1, st.accum.b1, lr, st.eps);
    adagrad_step(p.w2, g.w2, st.accum.w2, lr, st.eps);
    adagrad_step(p.b2, g.b2, st.accum.b2, lr, st.eps);
}

}  // namespace hsc
