#pragma once

// Two-layer perceptron with exact analytic backward, l2 normalization with
// Jacobian-vector product, and cosine similarity. All model math runs in
// double precision so gradients can be checked against finite differences.

#include <cmath>

#include "hsc/core.hpp"

namespace hsc {

struct Mlp2Params {
    Matrix w1;  // H x Din
    Vec b1;     // H
    Matrix w2;  // Dout x H
    Vec b2;     // Dout

    int in_dim() const { return w1.cols; }
    int hidden_dim() const { return w1.rows; }
    int out_dim() const { return w2.rows; }

    void check_consistent() const {
        if (isize(b1) != w1.rows || w2.cols != w1.rows || isize(b2) != w2.rows)
            throw ShapeError("Mlp2Params: inconsistent shapes");
    }
};

// Default hidden width when a config does not pin one.
inline int default_hidden_dim(int in_dim, int out_dim) { return (in_dim + out_dim + 1) / 2; }

// Uniform Glorot init, biases zero.
inline Matrix init_weight(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    double limit = std::sqrt(6.0 / (rows + cols));
    for (double& x : m.a) x = rng.uniform(-limit, limit);
    return m;
}

inline Mlp2Params make_mlp2(int in_dim, int hidden_dim, int out_dim, Rng& rng) {
    if (in_dim <= 0 || hidden_dim <= 0 || out_dim <= 0)
        throw ShapeError("make_mlp2: dimensions must be positive");
    Mlp2Params p;
    p.w1 = init_weight(hidden_dim, in_dim, rng);
    p.b1.assign(hidden_dim, 0.0);
    p.w2 = init_weight(out_dim, hidden_dim, rng);
    p.b2.assign(out_dim, 0.0);
    return p;
}

inline Mlp2Params zeros_like(const Mlp2Params& p) {
    Mlp2Params z;
    z.w1 = Matrix(p.w1.rows, p.w1.cols);
    z.b1.assign(p.b1.size(), 0.0);
    z.w2 = Matrix(p.w2.rows, p.w2.cols);
    z.b2.assign(p.b2.size(), 0.0);
    return z;
}

struct Mlp2Cache {
    Vec x;   // input
    Vec z1;  // pre-activation
    Vec h;   // relu(z1)
};

// y = w2 * relu(w1 * x + b1) + b2
inline Vec mlp2_apply(const Mlp2Params& p, const Vec& x, Mlp2Cache* cache = nullptr) {
    p.check_consistent();
    require_dim(x, p.in_dim(), "mlp2_apply input");
    Vec z1 = matvec(p.w1, x);
    for (size_t i = 0; i < z1.size(); ++i) z1[i] += p.b1[i];
    Vec h = z1;
    for (double& v : h) v = v > 0.0 ? v : 0.0;
    Vec y = matvec(p.w2, h);
    for (size_t i = 0; i < y.size(); ++i) y[i] += p.b2[i];
    if (cache) {
        cache->x = x;
        cache->z1 = std::move(z1);
        cache->h = std::move(h);
    }
    return y;
}

// Contracts dy with the exact Jacobians; parameter gradients accumulate into
// `grads` (must be shaped like `p`). Returns dL/dx. ReLU subgradient at the
// kink is 0.
inline Vec mlp2_backward(const Mlp2Params& p, const Mlp2Cache& cache, const Vec& dy, Mlp2Params& grads) {
    p.check_consistent();
    if (isize(cache.x) != p.in_dim() || isize(cache.z1) != p.hidden_dim() || isize(cache.h) != p.hidden_dim())
        throw UsageError("mlp2_backward: cache does not match parameters");
    require_dim(dy, p.out_dim(), "mlp2_backward dy");
    if (!grads.w1.same_shape(p.w1) || !grads.w2.same_shape(p.w2) || grads.b1.size() != p.b1.size() ||
        grads.b2.size() != p.b2.size())
        throw ShapeError("mlp2_backward: grads shaped unlike params");

    add_outer(grads.w2, dy, cache.h);
    for (size_t i = 0; i < dy.size(); ++i) grads.b2[i] += dy[i];

    Vec dh = matvec_t(p.w2, dy);
    for (size_t i = 0; i < dh.size(); ++i)
        if (cache.z1[i] <= 0.0) dh[i] = 0.0;

    add_outer(grads.w1, dh, cache.x);
    for (size_t i = 0; i < dh.size(); ++i) grads.b1[i] += dh[i];

    return matvec_t(p.w1, dh);
}

struct L2NormCache {
    Vec y;
    double norm = 0.0;
};

inline Vec l2_normalize(const Vec& x, L2NormCache* cache = nullptr) {
    double n = norm2(x);
    if (n <= kNormFloor) throw DegenerateInputError("l2_normalize: input norm below floor");
    Vec y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] / n;
    if (cache) {
        cache->y = y;
        cache->norm = n;
    }
    return y;
}

// dx = (dy - (y . dy) y) / ||x||
inline Vec l2_normalize_backward(const L2NormCache& cache, const Vec& dy) {
    if (dy.size() != cache.y.size()) throw ShapeError("l2_normalize_backward: dimension mismatch");
    double proj = dot(cache.y, dy);
    Vec dx(dy.size());
    for (size_t i = 0; i < dy.size(); ++i) dx[i] = (dy[i] - proj * cache.y[i]) / cache.norm;
    return dx;
}

inline double cosine_similarity(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("cosine_similarity: dimension mismatch");
    double na = norm2(a), nb = norm2(b);
    if (na <= kNormFloor || nb <= kNormFloor)
        throw DegenerateInputError("cosine_similarity: zero vector");
    return dot(a, b) / (na * nb);
}

// d cos(a, b) / da; does not assume unit norms.
inline Vec cosine_similarity_grad_a(const Vec& a, const Vec& b) {
    double na = norm2(a), nb = norm2(b);
    if (na <= kNormFloor || nb <= kNormFloor)
        throw DegenerateInputError("cosine_similarity_grad_a: zero vector");
    double c = dot(a, b) / (na * nb);
    Vec g(a.size());
    for (size_t i = 0; i < a.size(); ++i) g[i] = b[i] / (na * nb) - c * a[i] / (na * na);
    return g;
}

}  // namespace hsc
