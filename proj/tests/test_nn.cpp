#include <catch2/catch_amalgamated.hpp>

#include "hsc/adagrad.hpp"
#include "hsc/nn.hpp"
#include "oracles.hpp"

using namespace hsc;

TEST_CASE("mlp2_apply bias-only network returns b2") {
    Rng rng(1);
    Mlp2Params p = make_mlp2(3, 4, 2, rng);
    p.w1.a.assign(p.w1.a.size(), 0.0);
    p.w2.a.assign(p.w2.a.size(), 0.0);
    p.b2 = {0.5, -1.25};
    Vec y = mlp2_apply(p, {1.0, 2.0, 3.0});
    CHECK(y[0] == 0.5);
    CHECK(y[1] == -1.25);
}

TEST_CASE("mlp2_apply identity network passes positive input through") {
    Mlp2Params p;
    p.w1 = Matrix(3, 3);
    p.w2 = Matrix(3, 3);
    for (int i = 0; i < 3; ++i) {
        p.w1(i, i) = 1.0;
        p.w2(i, i) = 1.0;
    }
    p.b1.assign(3, 0.0);
    p.b2.assign(3, 0.0);
    Vec x = {0.3, 1.7, 2.0};
    Vec y = mlp2_apply(p, x);
    for (int i = 0; i < 3; ++i) CHECK(y[i] == Catch::Approx(x[i]).epsilon(0));
}

TEST_CASE("mlp2_apply matches straight-line reference on random instances") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        Mlp2Params p = oracles::random_mlp2(5, 7, 4, rng);
        Vec x = oracles::random_vec(5, rng);
        Vec y = mlp2_apply(p, x);
        Vec ref = oracles::mlp2_reference(p, x);
        CHECK(oracles::max_rel_err(y, ref) < 1e-13);
    }
}

TEST_CASE("mlp2_apply rejects dimension mismatch") {
    Rng rng(7);
    Mlp2Params p = make_mlp2(3, 4, 2, rng);
    CHECK_THROWS_AS(mlp2_apply(p, {1.0, 2.0}), ShapeError);
}

TEST_CASE("mlp2_backward zero cotangent gives zero grads") {
    Rng rng(3);
    Mlp2Params p = oracles::random_mlp2(4, 5, 3, rng);
    Mlp2Cache cache;
    mlp2_apply(p, oracles::random_vec(4, rng), &cache);
    Mlp2Params g = zeros_like(p);
    Vec dx = mlp2_backward(p, cache, {0.0, 0.0, 0.0}, g);
    for (double v : dx) CHECK(v == 0.0);
    for (double v : g.w1.a) CHECK(v == 0.0);
    for (double v : g.b2) CHECK(v == 0.0);
}

TEST_CASE("mlp2_backward identity network routes e1 through") {
    Mlp2Params p;
    p.w1 = Matrix(2, 2);
    p.w2 = Matrix(2, 2);
    p.w1(0, 0) = p.w1(1, 1) = 1.0;
    p.w2(0, 0) = p.w2(1, 1) = 1.0;
    p.b1.assign(2, 0.0);
    p.b2.assign(2, 0.0);
    Mlp2Cache cache;
    mlp2_apply(p, {1.0, 2.0}, &cache);  // positive pre-activations
    Mlp2Params g = zeros_like(p);
    Vec dx = mlp2_backward(p, cache, {1.0, 0.0}, g);
    CHECK(dx[0] == Catch::Approx(1.0));
    CHECK(dx[1] == Catch::Approx(0.0));
}

TEST_CASE("mlp2_backward rejects stale cache") {
    Rng rng(9);
    Mlp2Params p = make_mlp2(3, 4, 2, rng);
    Mlp2Params other = make_mlp2(5, 6, 2, rng);
    Mlp2Cache cache;
    mlp2_apply(other, oracles::random_vec(5, rng), &cache);
    Mlp2Params g = zeros_like(p);
    CHECK_THROWS_AS(mlp2_backward(p, cache, {1.0, 1.0}, g), UsageError);
}

TEST_CASE("mlp2_backward matches finite differences") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        Mlp2Params p = oracles::random_mlp2(4, 6, 3, rng);
        Vec x = oracles::random_vec(4, rng);
        Vec dy = oracles::random_vec(3, rng);

        Mlp2Cache cache;
        mlp2_apply(p, x, &cache);
        Mlp2Params g = zeros_like(p);
        Vec dx = mlp2_backward(p, cache, dy, g);

        // scalar objective: dy . mlp2(p, x)
        auto loss_of_x = [&](const Vec& xx) { return dot(dy, mlp2_apply(p, xx)); };
        Vec fd_x = oracles::finite_diff(loss_of_x, x);
        CHECK(oracles::max_rel_err(dx, fd_x) < 1e-4);

        Mlp2Params probe = p;
        auto ptrs = oracles::param_ptrs(probe);
        Vec analytic;
        {
            Mlp2Params gg = g;
            for (double v : gg.w1.a) analytic.push_back(v);
            for (double v : gg.b1) analytic.push_back(v);
            for (double v : gg.w2.a) analytic.push_back(v);
            for (double v : gg.b2) analytic.push_back(v);
        }
        Vec fd_p(ptrs.size());
        const double h = 1e-5;
        for (size_t i = 0; i < ptrs.size(); ++i) {
            double keep = *ptrs[i];
            *ptrs[i] = keep + h;
            double fp = dot(dy, mlp2_apply(probe, x));
            *ptrs[i] = keep - h;
            double fm = dot(dy, mlp2_apply(probe, x));
            *ptrs[i] = keep;
            fd_p[i] = (fp - fm) / (2.0 * h);
        }
        CHECK(oracles::max_rel_err(analytic, fd_p) < 1e-4);
    }
}

TEST_CASE("l2_normalize on 3-4-5 triangle") {
    Vec y = l2_normalize({3.0, 4.0});
    CHECK(y[0] == Catch::Approx(0.6));
    CHECK(y[1] == Catch::Approx(0.8));
}

TEST_CASE("l2_normalize is idempotent on unit vectors") {
    Rng rng(5);
    Vec v = l2_normalize(oracles::random_vec(6, rng));
    Vec w = l2_normalize(v);
    CHECK(oracles::max_rel_err(v, w) < 1e-12);
    CHECK(std::abs(norm2(w) - 1.0) < 1e-9);
}

TEST_CASE("l2_normalize rejects near-zero input") {
    CHECK_THROWS_AS(l2_normalize({0.0, 0.0, 0.0}), DegenerateInputError);
}

TEST_CASE("l2_normalize backward matches finite differences") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        Vec x = oracles::random_vec(5, rng);
        Vec dy = oracles::random_vec(5, rng);
        L2NormCache cache;
        l2_normalize(x, &cache);
        Vec dx = l2_normalize_backward(cache, dy);
        auto f = [&](const Vec& xx) { return dot(dy, l2_normalize(xx)); };
        Vec fd = oracles::finite_diff(f, x);
        CHECK(oracles::max_rel_err(dx, fd) < 1e-4);
    }
}

TEST_CASE("cosine similarity basics") {
    Vec a = {1.0, 0.0};
    CHECK(cosine_similarity(a, a) == Catch::Approx(1.0));
    CHECK(cosine_similarity({1.0, 0.0}, {0.0, 1.0}) == Catch::Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(cosine_similarity({0.0, 0.0}, {1.0, 0.0}), DegenerateInputError);

    Rng rng(17);
    Vec u = oracles::random_vec(8, rng);
    Vec v = oracles::random_vec(8, rng);
    double expect = dot(u, v) / (norm2(u) * norm2(v));
    CHECK(cosine_similarity(u, v) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("cosine similarity is symmetric and scale-invariant") {
    Rng rng(19);
    for (int trial = 0; trial < 25; ++trial) {
        Vec a = oracles::random_vec(6, rng);
        Vec b = oracles::random_vec(6, rng);
        double lam = std::exp(rng.uniform(-2.0, 2.0));
        double mu = std::exp(rng.uniform(-2.0, 2.0));
        Vec a2 = a, b2 = b;
        for (double& x : a2) x *= lam;
        for (double& x : b2) x *= mu;
        CHECK(std::abs(cosine_similarity(a, b) - cosine_similarity(b, a)) < 1e-12);
        CHECK(std::abs(cosine_similarity(a, b) - cosine_similarity(a2, b2)) < 1e-12);
        double c = cosine_similarity(a, b);
        CHECK(c <= 1.0 + 1e-12);
        CHECK(c >= -1.0 - 1e-12);
    }
}

TEST_CASE("cosine similarity gradient matches finite differences") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        Vec a = oracles::random_vec(5, rng);
        Vec b = oracles::random_vec(5, rng);
        Vec g = cosine_similarity_grad_a(a, b);
        auto f = [&](const Vec& aa) { return cosine_similarity(aa, b); };
        CHECK(oracles::max_rel_err(g, oracles::finite_diff(f, a)) < 1e-4);
    }
}

TEST_CASE("adagrad zero gradient leaves params unchanged") {
    Vec p = {1.0, -2.0};
    Vec g = {0.0, 0.0};
    Vec accum = {0.0, 0.0};
    adagrad_step(p, g, accum, 0.01);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
}

TEST_CASE("adagrad scalar hand evaluation") {
    // accum = 1, step = 0.01 * 1 / (1 + 1e-8)
    Vec p = {1.0};
    Vec g = {1.0};
    Vec accum = {0.0};
    adagrad_step(p, g, accum, 0.01);
    CHECK(p[0] == Catch::Approx(1.0 - 0.01 / (1.0 + 1e-8)).epsilon(1e-12));
    CHECK(accum[0] == 1.0);
}

TEST_CASE("adagrad second identical step is smaller") {
    Vec p = {1.0};
    Vec g = {0.5};
    Vec accum = {0.0};
    adagrad_step(p, g, accum, 0.01);
    double step1 = 1.0 - p[0];
    double before = p[0];
    adagrad_step(p, g, accum, 0.01);
    double step2 = before - p[0];
    CHECK(step2 < step1);
    CHECK(step2 > 0.0);
}

TEST_CASE("adagrad accumulators never decrease") {
    Rng rng(29);
    Vec p = oracles::random_vec(6, rng);
    Vec accum(6, 0.0);
    Vec prev = accum;
    for (int step = 0; step < 50; ++step) {
        Vec g = oracles::random_vec(6, rng);
        adagrad_step(p, g, accum, 0.01);
        for (int i = 0; i < 6; ++i) CHECK(accum[i] >= prev[i]);
        prev = accum;
    }
    CHECK(all_finite(p));
}

TEST_CASE("adagrad lr zero freezes parameters exactly") {
    Vec p = {1.0, -3.5};
    Vec g = {2.0, 0.7};
    Vec accum = {0.0, 0.0};
    adagrad_step(p, g, accum, 0.0);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -3.5);
    CHECK_THROWS_AS(adagrad_step(p, g, accum, -0.01), UsageError);
}
