#pragma once

// Test-only oracles, kept independent of the library code paths they check.

#include <cmath>
#include <functional>
#include <vector>

#include "hsc/core.hpp"
#include "hsc/nn.hpp"

namespace oracles {

// Central finite differences of a scalar function at x.
inline hsc::Vec finite_diff(const std::function<double(const hsc::Vec&)>& f, hsc::Vec x,
                            double h = 1e-5) {
    hsc::Vec g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double keep = x[i];
        x[i] = keep + h;
        double fp = f(x);
        x[i] = keep - h;
        double fm = f(x);
        x[i] = keep;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// max_i |a_i - b_i| / max(1e-8, |a_i|, |b_i|)
inline double max_rel_err(const hsc::Vec& a, const hsc::Vec& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double denom = std::max({1e-8, std::abs(a[i]), std::abs(b[i])});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

// Straight-line evaluation of the two-layer net, written independently of
// hsc::mlp2_apply (explicit index loops, no shared helpers).
inline hsc::Vec mlp2_reference(const hsc::Mlp2Params& p, const hsc::Vec& x) {
    std::vector<double> h(p.b1.size(), 0.0);
    for (int i = 0; i < p.w1.rows; ++i) {
        double s = p.b1[i];
        for (int j = 0; j < p.w1.cols; ++j) s += p.w1(i, j) * x[j];
        h[i] = s > 0.0 ? s : 0.0;
    }
    std::vector<double> y(p.b2.size(), 0.0);
    for (int i = 0; i < p.w2.rows; ++i) {
        double s = p.b2[i];
        for (int j = 0; j < p.w2.cols; ++j) s += p.w2(i, j) * h[j];
        y[i] = s;
    }
    return y;
}

inline hsc::Vec random_vec(int d, hsc::Rng& rng, double scale = 1.0) {
    hsc::Vec v(d);
    for (double& x : v) x = scale * rng.normal();
    return v;
}

inline hsc::Mlp2Params random_mlp2(int in, int hidden, int out, hsc::Rng& rng) {
    hsc::Mlp2Params p = hsc::make_mlp2(in, hidden, out, rng);
    // non-zero biases so bias gradients are exercised away from the origin
    for (double& b : p.b1) b = 0.1 * rng.normal();
    for (double& b : p.b2) b = 0.1 * rng.normal();
    return p;
}

// Flattened view over all parameters of an MLP, for finite differencing.
inline std::vector<double*> param_ptrs(hsc::Mlp2Params& p) {
    std::vector<double*> ptrs;
    for (double& x : p.w1.a) ptrs.push_back(&x);
    for (double& x : p.b1) ptrs.push_back(&x);
    for (double& x : p.w2.a) ptrs.push_back(&x);
    for (double& x : p.b2) ptrs.push_back(&x);
    return ptrs;
}

}  // namespace oracles
