#pragma once

// Two-stage training. Stage 1 minimizes, per stream, the sum of scene
// contrast, object contrast, linear scene classification, and reconstruction
// (unit weights), summed over both streams, with AdaGrad and per-batch
// momentum updates of the memory banks. Stage 2 freezes everything but the
// binary head and fits it on motion latents of original plus augmented
// samples.

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "hsc/adagrad.hpp"
#include "hsc/core.hpp"
#include "hsc/data.hpp"
#include "hsc/losses.hpp"
#include "hsc/model.hpp"
#include "hsc/nn.hpp"

namespace hsc {

struct TrainConfig {
    double tau = 0.5;
    double momentum = 0.9;
    double lr = 0.01;
    int batch_size = 32;
    int epochs = 100;
    int d_e = 64;
    int enc_hidden = 0;  // 0 = derived from layer dims
    int dec_hidden = 0;
    int bin_hidden = 0;
    uint64_t seed = 0;
    double label_percentile = 95.0;  // stage-2 pseudo-label threshold
    int stage2_epochs = 30;

    void check() const {
        if (tau <= 0.0) throw ConfigError("tau must be positive");
        if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
        if (lr <= 0.0) throw ConfigError("lr must be positive");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (epochs < 0) throw ConfigError("epochs must be >= 0");
        if (d_e <= 0) throw ConfigError("d_e must be positive");
        if (label_percentile < 0.0 || label_percentile > 100.0)
            throw ConfigError("label_percentile must lie in [0, 100]");
    }
};

// Immutable per-dataset tables shared by training, scoring, and export.
struct TrainContext {
    std::vector<Vec> clip_scene_features;  // per clip, unit norm
    std::vector<int> clip_of_sample;       // sample -> clip row
    ClassTable app_classes, mot_classes;
    std::vector<int> app_class_of_sample;
    std::vector<int> mot_class_of_sample;  // -1 when the sample has no motion
    std::vector<int> app_slot_of_sample;   // == sample row
    std::vector<int> mot_slot_of_sample;   // -1 when the sample has no motion

    int num_motion_samples = 0;
};

inline TrainContext build_train_context(const Dataset& ds, std::vector<Vec> clip_features) {
    if (clip_features.size() != ds.clips.size())
        throw UsageError("build_train_context: clip feature count mismatch");
    for (const auto& c : ds.clips)
        if (c.scene_label < 0) throw UsageError("build_train_context: scene labels not assigned");
    TrainContext ctx;
    ctx.clip_scene_features = std::move(clip_features);
    ClipLookup lut = make_clip_lookup(ds);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        ctx.clip_of_sample.push_back(lut.at(ClipKey{s.video_id, s.clip_index}));
        ctx.app_class_of_sample.push_back(ctx.app_classes.id_of(s.object_class));
        ctx.app_slot_of_sample.push_back(static_cast<int>(i));
        if (s.has_motion()) {
            ctx.mot_class_of_sample.push_back(ctx.mot_classes.id_of(s.action_class.value_or("")));
            ctx.mot_slot_of_sample.push_back(ctx.num_motion_samples++);
        } else {
            ctx.mot_class_of_sample.push_back(-1);
            ctx.mot_slot_of_sample.push_back(-1);
        }
    }
    return ctx;
}

struct Banks {
    MemoryBank app;
    MemoryBank mot;
};

inline int scene_label_of_sample(const Dataset& ds, const TrainContext& ctx, int sample) {
    return ds.clips[ctx.clip_of_sample[sample]].scene_label;
}

// One latent per training sample per stream, encoded with the current model.
inline Banks init_banks(const HscModel& model, const Dataset& ds, const TrainContext& ctx,
                        double momentum) {
    Banks banks;
    banks.app.momentum = momentum;
    banks.mot.momentum = momentum;
    banks.app.rows = Matrix(static_cast<int>(ds.samples.size()), model.dims.d_e);
    banks.mot.rows = Matrix(ctx.num_motion_samples, model.dims.d_e);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        const Vec& scene = ctx.clip_scene_features[ctx.clip_of_sample[i]];
        Vec la = encode(model, StreamId::app, scene, s.appearance);
        std::copy(la.begin(), la.end(), banks.app.rows.row(static_cast<int>(i)));
        banks.app.scene_labels.push_back(scene_label_of_sample(ds, ctx, static_cast<int>(i)));
        banks.app.class_ids.push_back(ctx.app_class_of_sample[i]);
        banks.app.sample_rows.push_back(static_cast<int>(i));
        if (s.has_motion()) {
            Vec lm = encode(model, StreamId::mot, scene, *s.motion);
            std::copy(lm.begin(), lm.end(), banks.mot.rows.row(ctx.mot_slot_of_sample[i]));
            banks.mot.scene_labels.push_back(scene_label_of_sample(ds, ctx, static_cast<int>(i)));
            banks.mot.class_ids.push_back(ctx.mot_class_of_sample[i]);
            banks.mot.sample_rows.push_back(static_cast<int>(i));
        }
    }
    return banks;
}

struct ModelGrads {
    Mlp2Params enc_app, dec_app, enc_mot, dec_mot;
    Matrix lc_app, lc_mot;

    static ModelGrads zeros_for(const HscModel& m) {
        ModelGrads g;
        g.enc_app = zeros_like(m.enc_app);
        g.dec_app = zeros_like(m.dec_app);
        g.lc_app = Matrix(m.lc_app.rows, m.lc_app.cols);
        if (m.dims.d_mot > 0) {
            g.enc_mot = zeros_like(m.enc_mot);
            g.dec_mot = zeros_like(m.dec_mot);
            g.lc_mot = Matrix(m.lc_mot.rows, m.lc_mot.cols);
        }
        return g;
    }
};

struct LossTerms {
    double rec_app = 0, scn_app = 0, obj_app = 0, lc_app = 0;
    double rec_mot = 0, scn_mot = 0, obj_mot = 0, lc_mot = 0;
    int skipped_scn = 0, skipped_obj = 0;

    double total() const {
        return rec_app + scn_app + obj_app + lc_app + rec_mot + scn_mot + obj_mot + lc_mot;
    }

    LossTerms& operator+=(const LossTerms& o) {
        rec_app += o.rec_app;
        scn_app += o.scn_app;
        obj_app += o.obj_app;
        lc_app += o.lc_app;
        rec_mot += o.rec_mot;
        scn_mot += o.scn_mot;
        obj_mot += o.obj_mot;
        lc_mot += o.lc_mot;
        skipped_scn += o.skipped_scn;
        skipped_obj += o.skipped_obj;
        return *this;
    }
};

namespace detail {

// Forward + backward of one stream for one sample; gradient contributions are
// scaled by `coeff` (the batch mean factor). Returns the latent for the
// subsequent memory update.
inline Vec stream_pass(const HscModel& model, StreamId stream, const Vec& scene_feat,
                       const Vec& obj_feat, int scene_label, int class_id,
                       const MemoryBank& bank, double tau, double coeff, ModelGrads& grads,
                       LossTerms& terms) {
    EncodeCache ec;
    Vec latent = encode(model, stream, scene_feat, obj_feat, &ec);

    Mlp2Cache dec_cache;
    Vec recon = decode(model, stream, latent, &dec_cache);
    LossGrad rec = loss_reconstruction(obj_feat, recon);

    Vec dlatent(latent.size(), 0.0);
    {
        Vec drecon = rec.grad;
        for (double& v : drecon) v *= coeff;
        Mlp2Params& dec_grads = stream == StreamId::app ? grads.dec_app : grads.dec_mot;
        Vec from_decoder = mlp2_backward(model.decoder(stream), dec_cache, drecon, dec_grads);
        axpy(1.0, from_decoder, dlatent);
    }

    auto scn = loss_scene_contrast(latent, bank, scene_label, tau);
    if (scn)
        axpy(coeff, scn->grad, dlatent);
    else
        terms.skipped_scn++;

    auto obj = loss_object_contrast(latent, bank, scene_label, class_id, tau);
    if (obj)
        axpy(coeff, obj->grad, dlatent);
    else
        terms.skipped_obj++;

    Vec logits = classify_scene(model, stream, latent);
    LossGrad lc = loss_linear_classification(logits, scene_label);
    {
        Matrix& lc_grads = stream == StreamId::app ? grads.lc_app : grads.lc_mot;
        Vec dlogits = lc.grad;
        for (double& v : dlogits) v *= coeff;
        add_outer(lc_grads, dlogits, latent);
        axpy(1.0, matvec_t(model.lc(stream), dlogits), dlatent);
    }

    Vec dpre = l2_normalize_backward(ec.norm, dlatent);
    Mlp2Params& enc_grads = stream == StreamId::app ? grads.enc_app : grads.enc_mot;
    mlp2_backward(model.encoder(stream), ec.mlp, dpre, enc_grads);

    if (stream == StreamId::app) {
        terms.rec_app += rec.loss;
        terms.scn_app += scn ? scn->loss : 0.0;
        terms.obj_app += obj ? obj->loss : 0.0;
        terms.lc_app += lc.loss;
    } else {
        terms.rec_mot += rec.loss;
        terms.scn_mot += scn ? scn->loss : 0.0;
        terms.obj_mot += obj ? obj->loss : 0.0;
        terms.lc_mot += lc.loss;
    }
    return latent;
}

}  // namespace detail

struct BatchResult {
    double scalar = 0.0;  // mean per-sample loss over the batch
    LossTerms terms;      // summed, unscaled
    ModelGrads grads;     // mean over batch samples
    std::vector<std::pair<int, Vec>> app_latents;  // (bank slot, latent)
    std::vector<std::pair<int, Vec>> mot_latents;
};

// Total loss and gradients over one batch; gradient = mean over the batch's
// samples, a sample without motion contributes its appearance terms only.
inline BatchResult combined_loss(const HscModel& model, const Dataset& ds, const TrainContext& ctx,
                                 const Banks& banks, const std::vector<int>& batch, double tau) {
    if (batch.empty()) throw UsageError("combined_loss: empty batch");
    BatchResult out;
    out.grads = ModelGrads::zeros_for(model);
    const double coeff = 1.0 / static_cast<double>(batch.size());
    for (int idx : batch) {
        const auto& s = ds.samples[idx];
        const Vec& scene = ctx.clip_scene_features[ctx.clip_of_sample[idx]];
        const int scene_label = scene_label_of_sample(ds, ctx, idx);
        Vec la = detail::stream_pass(model, StreamId::app, scene, s.appearance, scene_label,
                                     ctx.app_class_of_sample[idx], banks.app, tau, coeff,
                                     out.grads, out.terms);
        out.app_latents.emplace_back(ctx.app_slot_of_sample[idx], std::move(la));
        if (s.has_motion()) {
            Vec lm = detail::stream_pass(model, StreamId::mot, scene, *s.motion, scene_label,
                                         ctx.mot_class_of_sample[idx], banks.mot, tau, coeff,
                                         out.grads, out.terms);
            out.mot_latents.emplace_back(ctx.mot_slot_of_sample[idx], std::move(lm));
        }
    }
    out.scalar = out.terms.total() / static_cast<double>(batch.size());
    return out;
}

struct ModelOptState {
    AdaGradState enc_app, dec_app, enc_mot, dec_mot, bin;
    Matrix lc_app_accum, lc_mot_accum;

    static ModelOptState for_model(const HscModel& m) {
        ModelOptState st;
        st.enc_app = AdaGradState::for_params(m.enc_app);
        st.dec_app = AdaGradState::for_params(m.dec_app);
        st.lc_app_accum = Matrix(m.lc_app.rows, m.lc_app.cols);
        if (m.dims.d_mot > 0) {
            st.enc_mot = AdaGradState::for_params(m.enc_mot);
            st.dec_mot = AdaGradState::for_params(m.dec_mot);
            st.lc_mot_accum = Matrix(m.lc_mot.rows, m.lc_mot.cols);
        }
        st.bin = AdaGradState::for_params(m.bin);
        return st;
    }
};

inline void apply_stage1_step(HscModel& model, const ModelGrads& g, ModelOptState& st, double lr) {
    adagrad_step(model.enc_app, g.enc_app, st.enc_app, lr);
    adagrad_step(model.dec_app, g.dec_app, st.dec_app, lr);
    adagrad_step(model.lc_app, g.lc_app, st.lc_app_accum, lr);
    if (model.dims.d_mot > 0) {
        adagrad_step(model.enc_mot, g.enc_mot, st.enc_mot, lr);
        adagrad_step(model.dec_mot, g.dec_mot, st.dec_mot, lr);
        adagrad_step(model.lc_mot, g.lc_mot, st.lc_mot_accum, lr);
    }
}

struct EpochStats {
    int epoch = 0;
    double mean_total = 0.0;
    LossTerms sums;  // over the epoch
    int samples = 0;
    int motion_samples = 0;
};

using TrainHistory = std::vector<EpochStats>;

struct Stage1Result {
    HscModel model;
    Banks banks;
    ModelOptState opt;
    TrainHistory history;
};

// Stage-1 ablation: the plain autoencoder drops both contrastive terms and
// the LC head, keeping reconstruction only (banks still exist for retrieval).
enum class Stage1Variant { full, plain_ae };

namespace detail {

inline Vec ae_only_pass(const HscModel& model, StreamId stream, const Vec& scene_feat,
                        const Vec& obj_feat, double coeff, ModelGrads& grads, LossTerms& terms) {
    EncodeCache ec;
    Vec latent = encode(model, stream, scene_feat, obj_feat, &ec);
    Mlp2Cache dec_cache;
    Vec recon = decode(model, stream, latent, &dec_cache);
    LossGrad rec = loss_reconstruction(obj_feat, recon);
    Vec drecon = rec.grad;
    for (double& v : drecon) v *= coeff;
    Mlp2Params& dec_grads = stream == StreamId::app ? grads.dec_app : grads.dec_mot;
    Vec dlatent = mlp2_backward(model.decoder(stream), dec_cache, drecon, dec_grads);

    Vec dpre = l2_normalize_backward(ec.norm, dlatent);
    Mlp2Params& enc_grads = stream == StreamId::app ? grads.enc_app : grads.enc_mot;
    mlp2_backward(model.encoder(stream), ec.mlp, dpre, enc_grads);

    if (stream == StreamId::app)
        terms.rec_app += rec.loss;
    else
        terms.rec_mot += rec.loss;
    return latent;
}

}  // namespace detail

inline BatchResult batch_pass(const HscModel& model, const Dataset& ds, const TrainContext& ctx,
                              const Banks& banks, const std::vector<int>& batch, double tau,
                              Stage1Variant variant) {
    if (variant == Stage1Variant::full) return combined_loss(model, ds, ctx, banks, batch, tau);
    BatchResult out;
    out.grads = ModelGrads::zeros_for(model);
    const double coeff = 1.0 / static_cast<double>(batch.size());
    for (int idx : batch) {
        const auto& s = ds.samples[idx];
        const Vec& scene = ctx.clip_scene_features[ctx.clip_of_sample[idx]];
        Vec la = detail::ae_only_pass(model, StreamId::app, scene, s.appearance, coeff, out.grads,
                                      out.terms);
        out.app_latents.emplace_back(ctx.app_slot_of_sample[idx], std::move(la));
        if (s.has_motion()) {
            Vec lm = detail::ae_only_pass(model, StreamId::mot, scene, *s.motion, coeff, out.grads,
                                          out.terms);
            out.mot_latents.emplace_back(ctx.mot_slot_of_sample[idx], std::move(lm));
        }
    }
    out.scalar = out.terms.total() / static_cast<double>(batch.size());
    return out;
}

// Stage 1. Epoch 0 initializes the bank slots from encodings of the fresh
// model; each later step does combined_loss -> adagrad -> memory updates for
// the batch's samples (with the latents from the forward pass).
inline Stage1Result train_stage1(const Dataset& ds, const TrainContext& ctx,
                                 const TrainConfig& cfg,
                                 Stage1Variant variant = Stage1Variant::full) {
    cfg.check();
    if (ds.samples.empty()) throw UsageError("train_stage1: empty training set");
    int num_scenes = 0;
    for (const auto& c : ds.clips) num_scenes = std::max(num_scenes, c.scene_label + 1);

    Rng rng(cfg.seed);
    ModelDims dims;
    dims.d_app = ds.dims.d_app;
    dims.d_mot = ctx.num_motion_samples > 0 ? ds.dims.d_mot : 0;
    dims.d_scene = isize(ctx.clip_scene_features.at(0));
    dims.d_e = cfg.d_e;
    dims.enc_hidden = cfg.enc_hidden;
    dims.dec_hidden = cfg.dec_hidden;
    dims.bin_hidden = cfg.bin_hidden;

    Stage1Result out;
    out.model = make_hsc_model(dims, num_scenes, rng);
    out.banks = init_banks(out.model, ds, ctx, cfg.momentum);
    out.opt = ModelOptState::for_model(out.model);

    std::vector<int> order(ds.samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng = rng.fork(epoch);
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);

        EpochStats stats;
        stats.epoch = epoch;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<int> batch(order.begin() + start, order.begin() + stop);
            BatchResult br = batch_pass(out.model, ds, ctx, out.banks, batch, cfg.tau, variant);
            apply_stage1_step(out.model, br.grads, out.opt, cfg.lr);
            for (const auto& [slot, latent] : br.app_latents) memory_update(out.banks.app, slot, latent);
            for (const auto& [slot, latent] : br.mot_latents) memory_update(out.banks.mot, slot, latent);
            stats.sums += br.terms;
            stats.samples += static_cast<int>(batch.size());
            stats.motion_samples += static_cast<int>(br.mot_latents.size());
        }
        stats.mean_total = stats.sums.total() / std::max(1, stats.samples);
        out.history.push_back(stats);
    }
    return out;
}

// Eq-10/11 motion reconstruction error for one motion feature vector.
inline double motion_stream_score(const HscModel& model, const MemoryBank& mot_bank,
                                  const Vec& scene_feat, const Vec& motion_feat) {
    Vec latent = encode(model, StreamId::mot, scene_feat, motion_feat);
    Retrieval r = memory_retrieve(mot_bank, latent);
    Vec recon = decode(model, StreamId::mot, r.recon_latent);
    return loss_reconstruction(motion_feat, recon).loss;
}

// Linear-interpolated percentile of a sample (numpy-style), p in [0, 100].
inline double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) throw UsageError("percentile: empty sample");
    std::sort(xs.begin(), xs.end());
    if (xs.size() == 1) return xs[0];
    double pos = p / 100.0 * static_cast<double>(xs.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    if (lo >= xs.size() - 1) return xs.back();
    double frac = pos - static_cast<double>(lo);
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

struct AugmentedSample {
    int source_sample = -1;  // row in the training dataset
    Vec motion;
    bool severe = false;  // generator severity flag
};

// Threshold = percentile of motion-stream scores over the original training
// samples; an augmented sample is abnormal iff its score exceeds it.
inline std::vector<int> pseudo_label_augmented(const HscModel& model, const Banks& banks,
                                               const Dataset& ds, const TrainContext& ctx,
                                               const std::vector<AugmentedSample>& augmented,
                                               double pct, double* threshold_out = nullptr) {
    if (augmented.empty()) throw UsageError("pseudo_label_augmented: no augmented samples");
    std::vector<double> train_scores;
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        if (!s.has_motion()) continue;
        const Vec& scene = ctx.clip_scene_features[ctx.clip_of_sample[i]];
        train_scores.push_back(motion_stream_score(model, banks.mot, scene, *s.motion));
    }
    if (train_scores.empty())
        throw UsageError("pseudo_label_augmented: training set has no motion samples");
    const double threshold = percentile(std::move(train_scores), pct);
    if (threshold_out) *threshold_out = threshold;
    std::vector<int> labels;
    labels.reserve(augmented.size());
    for (const auto& a : augmented) {
        const Vec& scene = ctx.clip_scene_features[ctx.clip_of_sample.at(a.source_sample)];
        double score = motion_stream_score(model, banks.mot, scene, a.motion);
        labels.push_back(score > threshold ? 1 : 0);
    }
    return labels;
}

struct Stage2Result {
    double final_mean_loss = 0.0;
    double train_accuracy = 0.0;
};

// Fits only the binary head on fixed motion latents. Labels: 0 normal,
// 1 abnormal; both classes must be present.
inline Stage2Result train_stage2(HscModel& model, const std::vector<Vec>& latents,
                                 const std::vector<int>& labels, const TrainConfig& cfg) {
    cfg.check();
    if (latents.size() != labels.size()) throw UsageError("train_stage2: size mismatch");
    if (latents.empty()) throw UsageError("train_stage2: empty training set");
    bool has0 = false, has1 = false;
    for (int l : labels) {
        if (l == 0) has0 = true;
        else if (l == 1) has1 = true;
        else throw UsageError("train_stage2: labels must be 0 or 1");
    }
    if (!has0 || !has1)
        throw UsageError("train_stage2: single-class label set, cannot fit a binary classifier");

    Rng rng(splitmix64(cfg.seed ^ 0x5747414532ULL));  // distinct stream from stage 1
    AdaGradState opt = AdaGradState::for_params(model.bin);
    std::vector<int> order(latents.size());
    std::iota(order.begin(), order.end(), 0);

    Stage2Result res;
    for (int epoch = 1; epoch <= cfg.stage2_epochs; ++epoch) {
        Rng shuffle_rng = rng.fork(epoch);
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);
        double loss_sum = 0.0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t stop = std::min(order.size(), start + cfg.batch_size);
            Mlp2Params grads = zeros_like(model.bin);
            const double coeff = 1.0 / static_cast<double>(stop - start);
            for (size_t k = start; k < stop; ++k) {
                const int idx = order[k];
                Mlp2Cache cache;
                Vec logits = mlp2_apply(model.bin, latents[idx], &cache);
                LossGrad lg = loss_linear_classification(logits, labels[idx]);
                loss_sum += lg.loss;
                Vec dlogits = lg.grad;
                for (double& v : dlogits) v *= coeff;
                mlp2_backward(model.bin, cache, dlogits, grads);
            }
            adagrad_step(model.bin, grads, opt, cfg.lr);
        }
        res.final_mean_loss = loss_sum / static_cast<double>(latents.size());
    }

    int correct = 0;
    for (size_t i = 0; i < latents.size(); ++i) {
        double p = binary_classify(model, latents[i]);
        correct += ((p > 0.5) == (labels[i] == 1)) ? 1 : 0;
    }
    res.train_accuracy = static_cast<double>(correct) / static_cast<double>(latents.size());
    return res;
}

}  // namespace hsc
