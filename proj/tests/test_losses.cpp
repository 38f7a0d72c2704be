#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hsc/losses.hpp"
#include "oracles.hpp"

using namespace hsc;

namespace {

MemoryBank bank_from_rows(const std::vector<Vec>& rows, const std::vector<int>& scenes,
                          const std::vector<int>& classes) {
    MemoryBank b;
    b.rows = Matrix(static_cast<int>(rows.size()), isize(rows[0]));
    for (size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), b.rows.row(static_cast<int>(i)));
    b.scene_labels = scenes;
    b.class_ids = classes;
    b.sample_rows.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) b.sample_rows[i] = static_cast<int>(i);
    return b;
}

}  // namespace

TEST_CASE("reconstruction loss basics") {
    Vec obj = {1.0, 0.0};
    CHECK(loss_reconstruction(obj, obj).loss == 0.0);
    LossGrad lg = loss_reconstruction(obj, {0.0, 0.0});
    CHECK(lg.loss == Catch::Approx(1.0));
    CHECK(lg.grad[0] == Catch::Approx(-2.0));
    CHECK(lg.grad[1] == Catch::Approx(0.0));
    CHECK_THROWS_AS(loss_reconstruction(obj, {1.0}), ShapeError);
}

TEST_CASE("reconstruction loss gradient matches finite differences") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        Vec obj = oracles::random_vec(6, rng);
        Vec recon = oracles::random_vec(6, rng);
        LossGrad lg = loss_reconstruction(obj, recon);
        auto f = [&](const Vec& r) { return loss_reconstruction(obj, r).loss; };
        CHECK(oracles::max_rel_err(lg.grad, oracles::finite_diff(f, recon)) < 1e-4);
    }
}

TEST_CASE("scene contrast hand value: one positive at sim 1, one negative at sim 0") {
    Vec anchor = {1.0, 0.0};
    MemoryBank bank = bank_from_rows({{1.0, 0.0}, {0.0, 1.0}}, {7, 8}, {0, 0});
    auto lg = loss_scene_contrast(anchor, bank, 7, 0.5);
    REQUIRE(lg.has_value());
    double expect = -std::log(std::exp(2.0) / (std::exp(2.0) + 1.0));
    CHECK(lg->loss == Catch::Approx(expect).epsilon(1e-9));
    CHECK(lg->loss == Catch::Approx(0.12693).margin(1e-5));
}

TEST_CASE("scene contrast with N identical positives equals N log N") {
    Vec anchor = {0.0, 1.0};
    for (int n : {1, 3, 5}) {
        std::vector<Vec> rows(n, anchor);
        MemoryBank bank = bank_from_rows(rows, std::vector<int>(n, 4), std::vector<int>(n, 0));
        auto lg = loss_scene_contrast(anchor, bank, 4, 0.5);
        REQUIRE(lg.has_value());
        CHECK(lg->loss == Catch::Approx(n * std::log(double(n))).margin(1e-9));
    }
}

TEST_CASE("scene contrast decreases when a positive moves toward the anchor") {
    Vec anchor = {1.0, 0.0, 0.0};
    Vec far_pos = l2_normalize({1.0, 1.0, 0.0});
    Vec near_pos = l2_normalize({1.0, 0.2, 0.0});
    Vec negative = {0.0, 0.0, 1.0};
    auto loss_with = [&](const Vec& pos) {
        MemoryBank bank = bank_from_rows({pos, negative}, {1, 2}, {0, 0});
        return loss_scene_contrast(anchor, bank, 1, 0.5)->loss;
    };
    CHECK(loss_with(near_pos) < loss_with(far_pos));
}

TEST_CASE("scene contrast returns skip signal when no entry shares the label") {
    Vec anchor = {1.0, 0.0};
    MemoryBank bank = bank_from_rows({{0.0, 1.0}}, {3}, {0});
    CHECK_FALSE(loss_scene_contrast(anchor, bank, 9, 0.5).has_value());
}

TEST_CASE("scene contrast is invariant under bank row permutation") {
    Rng rng(5);
    std::vector<Vec> rows;
    std::vector<int> scenes;
    for (int i = 0; i < 6; ++i) {
        rows.push_back(l2_normalize(oracles::random_vec(4, rng)));
        scenes.push_back(i % 2);
    }
    Vec anchor = l2_normalize(oracles::random_vec(4, rng));
    MemoryBank b1 = bank_from_rows(rows, scenes, std::vector<int>(6, 0));
    std::vector<Vec> rows2 = {rows[3], rows[5], rows[0], rows[4], rows[1], rows[2]};
    std::vector<int> scenes2 = {scenes[3], scenes[5], scenes[0], scenes[4], scenes[1], scenes[2]};
    MemoryBank b2 = bank_from_rows(rows2, scenes2, std::vector<int>(6, 0));
    double l1 = loss_scene_contrast(anchor, b1, 1, 0.5)->loss;
    double l2 = loss_scene_contrast(anchor, b2, 1, 0.5)->loss;
    CHECK(l1 == Catch::Approx(l2).epsilon(1e-12));
}

TEST_CASE("scene contrast gradient matches finite differences") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Vec> rows;
        std::vector<int> scenes;
        for (int i = 0; i < 5; ++i) {
            rows.push_back(l2_normalize(oracles::random_vec(4, rng)));
            scenes.push_back(i % 2);
        }
        MemoryBank bank = bank_from_rows(rows, scenes, std::vector<int>(5, 0));
        Vec anchor = l2_normalize(oracles::random_vec(4, rng));
        auto lg = loss_scene_contrast(anchor, bank, 0, 0.5);
        REQUIRE(lg.has_value());
        auto f = [&](const Vec& a) { return loss_scene_contrast(a, bank, 0, 0.5)->loss; };
        CHECK(oracles::max_rel_err(lg->grad, oracles::finite_diff(f, anchor)) < 1e-4);
    }
}

TEST_CASE("object contrast singleton scene gives zero loss") {
    Vec anchor = {1.0, 0.0};
    MemoryBank bank = bank_from_rows({{1.0, 0.0}}, {2}, {5});
    auto lg = loss_object_contrast(anchor, bank, 2, 5, 0.5);
    REQUIRE(lg.has_value());
    CHECK(lg->loss == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("object contrast hand value within one scene") {
    Vec anchor = {1.0, 0.0};
    // both entries share the scene; one shares the class at sim 1, the other is orthogonal
    MemoryBank bank = bank_from_rows({{1.0, 0.0}, {0.0, 1.0}}, {2, 2}, {5, 6});
    auto lg = loss_object_contrast(anchor, bank, 2, 5, 0.5);
    REQUIRE(lg.has_value());
    CHECK(lg->loss == Catch::Approx(0.12693).margin(1e-5));
}

TEST_CASE("object contrast ignores entries outside the scene") {
    Rng rng(9);
    std::vector<Vec> rows;
    for (int i = 0; i < 6; ++i) rows.push_back(l2_normalize(oracles::random_vec(4, rng)));
    std::vector<int> scenes = {0, 0, 0, 1, 1, 1};
    std::vector<int> classes = {2, 2, 3, 2, 3, 3};
    MemoryBank bank = bank_from_rows(rows, scenes, classes);
    Vec anchor = l2_normalize(oracles::random_vec(4, rng));
    double base = loss_object_contrast(anchor, bank, 0, 2, 0.5)->loss;

    // perturb all scene-1 entries arbitrarily
    for (int i = 3; i < 6; ++i) {
        Vec noise = l2_normalize(oracles::random_vec(4, rng));
        std::copy(noise.begin(), noise.end(), bank.rows.row(i));
    }
    double after = loss_object_contrast(anchor, bank, 0, 2, 0.5)->loss;
    CHECK(base == Catch::Approx(after).epsilon(1e-14));
}

TEST_CASE("object contrast skip signal when the class set is empty") {
    Vec anchor = {1.0, 0.0};
    MemoryBank bank = bank_from_rows({{1.0, 0.0}}, {2}, {5});
    CHECK_FALSE(loss_object_contrast(anchor, bank, 2, 9, 0.5).has_value());
    CHECK_FALSE(loss_object_contrast(anchor, bank, 4, 5, 0.5).has_value());
}

TEST_CASE("object contrast gradient matches finite differences") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Vec> rows;
        std::vector<int> scenes, classes;
        for (int i = 0; i < 6; ++i) {
            rows.push_back(l2_normalize(oracles::random_vec(4, rng)));
            scenes.push_back(i % 2);
            classes.push_back(i % 3);
        }
        MemoryBank bank = bank_from_rows(rows, scenes, classes);
        Vec anchor = l2_normalize(oracles::random_vec(4, rng));
        auto lg = loss_object_contrast(anchor, bank, 0, 0, 0.5);
        REQUIRE(lg.has_value());
        auto f = [&](const Vec& a) { return loss_object_contrast(a, bank, 0, 0, 0.5)->loss; };
        CHECK(oracles::max_rel_err(lg->grad, oracles::finite_diff(f, anchor)) < 1e-4);
    }
}

TEST_CASE("linear classification loss: uniform logits give log C") {
    Vec logits(4, 0.25);
    LossGrad lg = loss_linear_classification(logits, 2);
    CHECK(lg.loss == Catch::Approx(std::log(4.0)));
}

TEST_CASE("linear classification loss saturates when the true logit dominates") {
    Vec logits = {0.0, 50.0, 0.0};
    LossGrad lg = loss_linear_classification(logits, 1);
    CHECK(lg.loss == Catch::Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(loss_linear_classification(logits, 3), UsageError);
}

TEST_CASE("linear classification gradient matches finite differences") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        Vec logits = oracles::random_vec(5, rng);
        int label = rng.uniform_int(5);
        LossGrad lg = loss_linear_classification(logits, label);
        auto f = [&](const Vec& l) { return loss_linear_classification(l, label).loss; };
        CHECK(oracles::max_rel_err(lg.grad, oracles::finite_diff(f, logits)) < 1e-4);
        CHECK(lg.loss >= 0.0);
    }
}

TEST_CASE("every loss is non-negative on random instances") {
    Rng rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Vec> rows;
        std::vector<int> scenes, classes;
        for (int i = 0; i < 5; ++i) {
            rows.push_back(l2_normalize(oracles::random_vec(3, rng)));
            scenes.push_back(i % 2);
            classes.push_back(i % 2);
        }
        MemoryBank bank = bank_from_rows(rows, scenes, classes);
        Vec anchor = l2_normalize(oracles::random_vec(3, rng));
        CHECK(loss_scene_contrast(anchor, bank, 0, 0.5)->loss >= 0.0);
        CHECK(loss_object_contrast(anchor, bank, 0, 0, 0.5)->loss >= 0.0);
        CHECK(loss_reconstruction(oracles::random_vec(3, rng), oracles::random_vec(3, rng)).loss >= 0.0);
    }
}
