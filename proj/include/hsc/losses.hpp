#pragma once

// Per-term training losses with exact analytic gradients. The contrastive
// terms treat memory rows as constants; their gradient flows only into the
// anchor. Samples whose positive set is empty yield no value (skip signal,
// counted by the caller), since a zero-positive InfoNCE is undefined.

#include <cmath>
#include <optional>
#include <vector>

#include "hsc/core.hpp"
#include "hsc/model.hpp"
#include "hsc/nn.hpp"

namespace hsc {

struct LossGrad {
    double loss = 0.0;
    Vec grad;  // w.r.t. the operation's differentiated input
};

// loss = ||obj - recon||^2, grad w.r.t. recon.
inline LossGrad loss_reconstruction(const Vec& obj_feat, const Vec& recon) {
    if (obj_feat.size() != recon.size()) throw ShapeError("loss_reconstruction: dim mismatch");
    LossGrad out;
    out.grad.resize(recon.size());
    for (size_t i = 0; i < recon.size(); ++i) {
        const double d = recon[i] - obj_feat[i];
        out.loss += d * d;
        out.grad[i] = 2.0 * d;
    }
    return out;
}

// softmax cross-entropy against the pseudo scene label, grad w.r.t. logits.
inline LossGrad loss_linear_classification(const Vec& logits, int label) {
    if (label < 0 || label >= isize(logits))
        throw UsageError("loss_linear_classification: label out of range");
    double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - peak);
    const double lse = peak + std::log(sum);
    LossGrad out;
    out.loss = lse - logits[label];
    out.grad.resize(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) out.grad[i] = std::exp(logits[i] - lse);
    out.grad[label] -= 1.0;
    return out;
}

namespace detail {

// Shared InfoNCE core: positives and denominator are index sets over the
// bank. loss = |P| * logsumexp(u_D) - sum_{j in P} u_j with u = sim/tau.
inline LossGrad contrast_over_sets(const Vec& anchor, const MemoryBank& bank,
                                   const std::vector<int>& positives,
                                   const std::vector<int>& denominator, double tau) {
    std::vector<double> sims(denominator.size());
    double peak = -1e300;
    for (size_t k = 0; k < denominator.size(); ++k) {
        sims[k] = cosine_similarity(anchor, bank.row_vec(denominator[k])) / tau;
        peak = std::max(peak, sims[k]);
    }
    double sum = 0.0;
    for (double u : sims) sum += std::exp(u - peak);
    const double lse = peak + std::log(sum);

    LossGrad out;
    out.loss = static_cast<double>(positives.size()) * lse;
    out.grad.assign(anchor.size(), 0.0);

    // dL/du_k = |P| * softmax_k for k in denominator; -1 extra for positives
    for (size_t k = 0; k < denominator.size(); ++k) {
        const double coeff = static_cast<double>(positives.size()) * std::exp(sims[k] - lse) / tau;
        axpy(coeff, cosine_similarity_grad_a(anchor, bank.row_vec(denominator[k])), out.grad);
    }
    for (int j : positives) {
        out.loss -= cosine_similarity(anchor, bank.row_vec(j)) / tau;
        axpy(-1.0 / tau, cosine_similarity_grad_a(anchor, bank.row_vec(j)), out.grad);
    }
    return out;
}

}  // namespace detail

// Eq-3-style scene-level contrast: positives share the anchor's pseudo scene
// label, denominator runs over the whole bank.
inline std::optional<LossGrad> loss_scene_contrast(const Vec& anchor, const MemoryBank& bank,
                                                   int scene_label, double tau) {
    if (bank.size() == 0) throw UsageError("loss_scene_contrast: empty bank");
    if (tau <= 0.0) throw ConfigError("loss_scene_contrast: tau must be positive");
    std::vector<int> positives, denominator(bank.size());
    for (int i = 0; i < bank.size(); ++i) {
        denominator[i] = i;
        if (bank.scene_labels[i] == scene_label) positives.push_back(i);
    }
    if (positives.empty()) return std::nullopt;
    return detail::contrast_over_sets(anchor, bank, positives, denominator, tau);
}

// Eq-5-style object-level contrast: positives share scene and object/action
// class; only same-scene entries enter the denominator.
inline std::optional<LossGrad> loss_object_contrast(const Vec& anchor, const MemoryBank& bank,
                                                    int scene_label, int class_id, double tau) {
    if (bank.size() == 0) throw UsageError("loss_object_contrast: empty bank");
    if (tau <= 0.0) throw ConfigError("loss_object_contrast: tau must be positive");
    std::vector<int> positives, denominator;
    for (int i = 0; i < bank.size(); ++i) {
        if (bank.scene_labels[i] != scene_label) continue;
        denominator.push_back(i);
        if (bank.class_ids[i] == class_id) positives.push_back(i);
    }
    if (positives.empty()) return std::nullopt;
    return detail::contrast_over_sets(anchor, bank, positives, denominator, tau);
}

}  // namespace hsc
