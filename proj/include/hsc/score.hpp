#pragma once

// Test-time scoring: per-object reconstruction error through memory
// retrieval, clip max-aggregation, per-video Gaussian smoothing of the
// frame-expanded series, and micro-averaged frame-level ROC AUC.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hsc/core.hpp"
#include "hsc/data.hpp"
#include "hsc/losses.hpp"
#include "hsc/model.hpp"

namespace hsc {

struct ObjectScore {
    double s_app = 0.0;
    double s_mot = 0.0;  // reconstruction error, or anomaly probability in stage-2 mode
    double s = 0.0;
    bool used_motion = false;
};

// Eq-10/11/12 style score for one sample. With the stage-2 classifier
// active, the motion term is its anomaly probability instead of the
// reconstruction error. Appearance-only samples score on that stream alone.
inline ObjectScore score_object(const HscModel& model, const MemoryBank& app_bank,
                                const MemoryBank& mot_bank, const Vec& scene_feat,
                                const TrackletSample& sample, bool stage2_active) {
    ObjectScore out;
    Vec latent_app = encode(model, StreamId::app, scene_feat, sample.appearance);
    Retrieval ra = memory_retrieve(app_bank, latent_app);
    Vec recon_app = decode(model, StreamId::app, ra.recon_latent);
    out.s_app = loss_reconstruction(sample.appearance, recon_app).loss;

    if (sample.has_motion() && model.dims.d_mot > 0) {
        Vec latent_mot = encode(model, StreamId::mot, scene_feat, *sample.motion);
        if (stage2_active) {
            out.s_mot = binary_classify(model, latent_mot);
        } else {
            Retrieval rm = memory_retrieve(mot_bank, latent_mot);
            Vec recon_mot = decode(model, StreamId::mot, rm.recon_latent);
            out.s_mot = loss_reconstruction(*sample.motion, recon_mot).loss;
        }
        out.used_motion = true;
        out.s = 0.5 * (out.s_app + out.s_mot);
    } else {
        out.s = out.s_app;
    }
    return out;
}

// Clip score = max over its objects; clips without objects score 0.
inline std::vector<double> score_clips(const Dataset& ds, const std::vector<double>& object_scores) {
    if (object_scores.size() != ds.samples.size())
        throw UsageError("score_clips: one score per sample required");
    ClipLookup lut = make_clip_lookup(ds);
    std::vector<double> clip_scores(ds.clips.size(), 0.0);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        int row = lut.at(ClipKey{s.video_id, s.clip_index});
        clip_scores[row] = std::max(clip_scores[row], object_scores[i]);
    }
    return clip_scores;
}

// 1-D Gaussian smoothing, kernel radius ceil(3 sigma), reflected boundary
// (scipy-style: d c b a | a b c d | d c b a). sigma = 0 is the identity.
inline std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma) {
    if (sigma < 0.0) throw ConfigError("gaussian_smooth: sigma must be >= 0");
    if (sigma == 0.0 || series.empty()) return series;
    const int n = static_cast<int>(series.size());
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * (k / sigma) * (k / sigma));
        sum += kernel[k + radius];
    }
    for (double& v : kernel) v /= sum;

    auto reflect = [n](int idx) {
        while (idx < 0 || idx >= n) {
            if (idx < 0) idx = -idx - 1;
            if (idx >= n) idx = 2 * n - idx - 1;
        }
        return idx;
    };
    std::vector<double> out(series.size());
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * series[reflect(i + k)];
        out[i] = acc;
    }
    return out;
}

// Frame-level AUC via the Mann-Whitney statistic with average ranks for
// ties. Requires both classes.
inline double micro_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw UsageError("micro_auc: size mismatch");
    const size_t n = scores.size();
    size_t n_pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw UsageError("micro_auc: labels must be 0 or 1");
        n_pos += static_cast<size_t>(l);
    }
    const size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UsageError("micro_auc: both classes required");

    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t k = i; k <= j; ++k)
            if (labels[idx[k]] == 1) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

inline std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                        const std::vector<int>& labels) {
    const size_t n = scores.size();
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    double n_pos = 0, n_neg = 0;
    for (int l : labels) (l ? n_pos : n_neg) += 1.0;
    std::vector<RocPoint> pts;
    pts.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    double tp = 0, fp = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        for (size_t k = i; k <= j; ++k) {
            if (labels[idx[k]] == 1)
                tp += 1.0;
            else
                fp += 1.0;
        }
        pts.push_back({scores[idx[i]], fp / std::max(1.0, n_neg), tp / std::max(1.0, n_pos)});
        i = j + 1;
    }
    return pts;
}

// Frame-expanded score series: clips grouped per video (first-appearance
// order), sorted by clip_index inside a video, each clip contributing
// frame_count copies of its score; smoothing runs per video before the
// series are concatenated. The smoothing sigma is given in clips and scaled
// by the video's mean clip length.
struct FrameSeries {
    std::vector<double> raw;
    std::vector<double> smoothed;
    std::vector<int> labels;
    std::vector<std::string> video_of;
    std::vector<int> frame_of;  // frame index within the video
};

inline FrameSeries expand_and_smooth(const Dataset& ds, const std::vector<double>& clip_scores,
                                     double sigma_clips) {
    if (clip_scores.size() != ds.clips.size())
        throw UsageError("expand_and_smooth: one score per clip required");
    std::vector<std::string> video_order;
    std::map<std::string, std::vector<int>> clips_of;
    for (size_t i = 0; i < ds.clips.size(); ++i) {
        const auto& c = ds.clips[i];
        if (!clips_of.count(c.video_id)) video_order.push_back(c.video_id);
        clips_of[c.video_id].push_back(static_cast<int>(i));
    }
    FrameSeries out;
    for (const auto& vid : video_order) {
        auto rows = clips_of[vid];
        std::sort(rows.begin(), rows.end(), [&](int a, int b) {
            return ds.clips[a].clip_index < ds.clips[b].clip_index;
        });
        std::vector<double> video_frames;
        std::vector<int> video_labels;
        double mean_len = 0.0;
        for (int r : rows) {
            const auto& c = ds.clips[r];
            const int label = c.anomaly_label.value_or(0);
            for (int f = 0; f < c.frame_count; ++f) {
                video_frames.push_back(clip_scores[r]);
                video_labels.push_back(label);
            }
            mean_len += c.frame_count;
        }
        mean_len /= static_cast<double>(rows.size());
        std::vector<double> smooth = gaussian_smooth(video_frames, sigma_clips * mean_len);
        for (size_t f = 0; f < video_frames.size(); ++f) {
            out.raw.push_back(video_frames[f]);
            out.smoothed.push_back(smooth[f]);
            out.labels.push_back(video_labels[f]);
            out.video_of.push_back(vid);
            out.frame_of.push_back(static_cast<int>(f));
        }
    }
    return out;
}

}  // namespace hsc
