#pragma once

// Skeleton-based spatio-temporal augmentation and the hand-crafted motion
// descriptor that stands in for a learned action feature. Every random draw
// goes through the caller's Rng and is recorded for replay.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hsc/core.hpp"
#include "hsc/data.hpp"

namespace hsc {

struct KinematicTree {
    std::vector<int> parent;            // parent[i] == i marks the root
    std::vector<bool> is_head;          // excluded from rotation
    std::vector<std::vector<int>> children;
    std::vector<int> topo;              // parents before children
    std::vector<std::vector<int>> subtree;  // node + all descendants

    int size() const { return static_cast<int>(parent.size()); }
    int root() const {
        for (int i = 0; i < size(); ++i)
            if (parent[i] == i) return i;
        throw UsageError("kinematic tree has no root");
    }

    static KinematicTree build(std::vector<int> parents, const std::vector<int>& head_indices) {
        KinematicTree t;
        t.parent = std::move(parents);
        const int n = t.size();
        t.is_head.assign(n, false);
        for (int h : head_indices) t.is_head.at(h) = true;
        t.children.assign(n, {});
        int roots = 0;
        for (int i = 0; i < n; ++i) {
            if (t.parent[i] == i) {
                ++roots;
            } else {
                if (t.parent[i] < 0 || t.parent[i] >= n) throw UsageError("parent index out of range");
                t.children[t.parent[i]].push_back(i);
            }
        }
        if (roots != 1) throw UsageError("kinematic tree must have exactly one root");
        // BFS gives a parents-first order and detects cycles.
        t.topo.reserve(n);
        t.topo.push_back(t.root());
        for (size_t k = 0; k < t.topo.size(); ++k)
            for (int c : t.children[t.topo[k]]) t.topo.push_back(c);
        if (static_cast<int>(t.topo.size()) != n) throw UsageError("kinematic tree contains a cycle");
        t.subtree.assign(n, {});
        for (int i = n - 1; i >= 0; --i) {
            const int node = t.topo[i];
            t.subtree[node].push_back(node);
            for (int c : t.children[node])
                t.subtree[node].insert(t.subtree[node].end(), t.subtree[c].begin(), t.subtree[c].end());
        }
        return t;
    }

    // 17-point COCO layout. Head points (nose, eyes, ears) never rotate.
    static const KinematicTree& coco17() {
        static const KinematicTree t = build(
            {
                0,   // 0 nose (root)
                0,   // 1 left eye
                0,   // 2 right eye
                1,   // 3 left ear
                2,   // 4 right ear
                0,   // 5 left shoulder
                0,   // 6 right shoulder
                5,   // 7 left elbow
                6,   // 8 right elbow
                7,   // 9 left wrist
                8,   // 10 right wrist
                5,   // 11 left hip
                6,   // 12 right hip
                11,  // 13 left knee
                12,  // 14 right knee
                13,  // 15 left ankle
                14,  // 16 right ankle
            },
            {0, 1, 2, 3, 4});
        return t;
    }
};

inline const KinematicTree& tree_for_scheme(const std::string& scheme) {
    if (scheme == "coco17") return KinematicTree::coco17();
    throw ConfigError("no kinematic tree for scheme: " + scheme);
}

struct AugmentConfig {
    double p_st = 0.5;                 // per-keypoint rotation probability
    double p_tc = 0.5;                 // per-frame drop probability
    double angle_min = -kPi / 6.0;     // radians
    double angle_max = kPi / 6.0;
    int min_frames = 4;
    uint64_t seed = 0;

    void check() const {
        if (p_st < 0.0 || p_st > 1.0 || p_tc < 0.0 || p_tc > 1.0)
            throw ConfigError("augment probabilities must lie in [0, 1]");
        if (angle_min > angle_max) throw ConfigError("angle_min must be <= angle_max");
        if (min_frames < 1) throw ConfigError("min_frames must be >= 1");
    }
};

// Row-vector convention: K_rot = (K - P) [[cos a, sin a], [-sin a, cos a]] + P.
inline std::array<double, 2> rotate_keypoint(const std::array<double, 2>& k,
                                             const std::array<double, 2>& p, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = k[0] - p[0], dy = k[1] - p[1];
    return {dx * c - dy * s + p[0], dx * s + dy * c + p[1]};
}

struct RotationDraw {
    int keypoint = 0;
    double angle = 0.0;
};

// Rigidly rotate keypoint k and its whole descendant subtree about the
// current position of k's parent.
inline void apply_subtree_rotation(SkeletonFrame& frame, const KinematicTree& tree, int k,
                                   double angle) {
    if (static_cast<int>(frame.keypoints.size()) != tree.size())
        throw ShapeError("apply_subtree_rotation: frame size differs from tree");
    const auto pivot = frame.keypoints[tree.parent[k]];
    for (int node : tree.subtree[k])
        frame.keypoints[node] = rotate_keypoint(frame.keypoints[node], pivot, angle);
}

// One pass over the tree, root-down; each non-head keypoint independently
// rotates (with its subtree) with probability p_st by a fresh angle.
inline SkeletonFrame spatial_transform(const SkeletonFrame& frame, const KinematicTree& tree,
                                       const AugmentConfig& cfg, Rng& rng,
                                       std::vector<RotationDraw>* trace = nullptr) {
    cfg.check();
    if (static_cast<int>(frame.keypoints.size()) != tree.size())
        throw ShapeError("spatial_transform: frame size differs from tree");
    SkeletonFrame out = frame;
    for (int k : tree.topo) {
        if (tree.is_head[k]) continue;
        if (!rng.bernoulli(cfg.p_st)) continue;
        const double angle = rng.uniform(cfg.angle_min, cfg.angle_max);
        apply_subtree_rotation(out, tree, k, angle);
        if (trace) trace->push_back({k, angle});
    }
    return out;
}

// Each frame is independently dropped with probability p_tc. If fewer than
// min_frames survive, the draw is retried a bounded number of times and then
// the earliest frames are kept.
inline std::vector<int> temporal_cut_indices(int frame_count, const AugmentConfig& cfg, Rng& rng) {
    cfg.check();
    if (frame_count <= 0) throw UsageError("temporal_cut: empty sequence");
    constexpr int kMaxRetries = 8;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        std::vector<int> kept;
        for (int f = 0; f < frame_count; ++f)
            if (!rng.bernoulli(cfg.p_tc)) kept.push_back(f);
        if (static_cast<int>(kept.size()) >= std::min(cfg.min_frames, frame_count)) return kept;
    }
    std::vector<int> fallback;
    for (int f = 0; f < std::min(cfg.min_frames, frame_count); ++f) fallback.push_back(f);
    return fallback;
}

template <typename T>
std::vector<T> select_indices(const std::vector<T>& xs, const std::vector<int>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(xs.at(i));
    return out;
}

struct AugmentTrace {
    std::vector<std::vector<RotationDraw>> rotations;  // per input frame
    std::vector<int> kept_frames;
};

// Spatial transform per frame, then temporal cutting.
inline std::vector<SkeletonFrame> augment_tracklet(const std::vector<SkeletonFrame>& seq,
                                                   const KinematicTree& tree,
                                                   const AugmentConfig& cfg, Rng& rng,
                                                   AugmentTrace* trace = nullptr) {
    if (seq.empty()) throw UsageError("augment_tracklet: empty sequence");
    std::vector<SkeletonFrame> transformed;
    transformed.reserve(seq.size());
    if (trace) trace->rotations.resize(seq.size());
    for (size_t f = 0; f < seq.size(); ++f)
        transformed.push_back(
            spatial_transform(seq[f], tree, cfg, rng, trace ? &trace->rotations[f] : nullptr));
    std::vector<int> kept = temporal_cut_indices(static_cast<int>(seq.size()), cfg, rng);
    if (trace) trace->kept_frames = kept;
    return select_indices(transformed, kept);
}

inline int motion_feature_dim(const KinematicTree& tree) {
    // per non-root edge: mean + std of joint angle; per keypoint: mean + max
    // frame-to-frame displacement
    return 2 * (tree.size() - 1) + 2 * tree.size();
}

// Deterministic motion descriptor in a translation- and scale-normalized
// frame: root-centered coordinates divided by the mean bone length.
inline Vec motion_featurize(const std::vector<SkeletonFrame>& seq, const KinematicTree& tree) {
    const int n_frames = static_cast<int>(seq.size());
    if (n_frames < 2) throw UsageError("motion_featurize: need at least 2 frames");
    const int n = tree.size();
    for (const auto& f : seq)
        if (static_cast<int>(f.keypoints.size()) != n)
            throw ShapeError("motion_featurize: frame size differs from tree");

    const int root = tree.root();
    double bone_sum = 0.0;
    int bone_count = 0;
    for (const auto& f : seq) {
        for (int k = 0; k < n; ++k) {
            if (tree.parent[k] == k) continue;
            const auto& a = f.keypoints[k];
            const auto& b = f.keypoints[tree.parent[k]];
            bone_sum += std::hypot(a[0] - b[0], a[1] - b[1]);
            ++bone_count;
        }
    }
    const double scale = bone_sum / bone_count;
    if (scale <= kNormFloor) throw DegenerateInputError("motion_featurize: degenerate skeleton");

    // normalized positions per frame
    std::vector<std::vector<std::array<double, 2>>> pos(n_frames);
    for (int f = 0; f < n_frames; ++f) {
        pos[f].resize(n);
        const auto& r = seq[f].keypoints[root];
        for (int k = 0; k < n; ++k) {
            pos[f][k] = {(seq[f].keypoints[k][0] - r[0]) / scale,
                         (seq[f].keypoints[k][1] - r[1]) / scale};
        }
    }

    Vec feat;
    feat.reserve(motion_feature_dim(tree));

    // (a) joint angle stats per non-root edge, index order. The reference
    // direction is the parent bone, or +x when the parent is the root.
    std::vector<double> angles(n_frames);
    for (int k = 0; k < n; ++k) {
        if (tree.parent[k] == k) continue;
        for (int f = 0; f < n_frames; ++f) {
            const int p = tree.parent[k];
            const double bx = pos[f][k][0] - pos[f][p][0];
            const double by = pos[f][k][1] - pos[f][p][1];
            double rx = 1.0, ry = 0.0;
            if (tree.parent[p] != p) {
                rx = pos[f][p][0] - pos[f][tree.parent[p]][0];
                ry = pos[f][p][1] - pos[f][tree.parent[p]][1];
            }
            angles[f] = 0.0;
            if (std::hypot(bx, by) > kNormFloor && std::hypot(rx, ry) > kNormFloor)
                angles[f] = std::atan2(rx * by - ry * bx, rx * bx + ry * by);
        }
        double mean = 0.0;
        for (double a : angles) mean += a;
        mean /= n_frames;
        double var = 0.0;  // two-pass: stable for near-constant angles
        for (double a : angles) var += (a - mean) * (a - mean);
        var /= n_frames;
        feat.push_back(mean);
        feat.push_back(std::sqrt(var));
    }

    // (b) frame-to-frame displacement magnitude per keypoint: mean and max.
    for (int k = 0; k < n; ++k) {
        double sum = 0.0, peak = 0.0;
        for (int f = 0; f + 1 < n_frames; ++f) {
            const double d = std::hypot(pos[f + 1][k][0] - pos[f][k][0],
                                        pos[f + 1][k][1] - pos[f][k][1]);
            sum += d;
            peak = std::max(peak, d);
        }
        feat.push_back(sum / (n_frames - 1));
        feat.push_back(peak);
    }
    return feat;
}

}  // namespace hsc
