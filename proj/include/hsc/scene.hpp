#pragma once

// Scene descriptors from segmentation grids, plus DBSCAN pseudo-labels.
//
// A clip's scene feature: per frame, each class id becomes a binary map with
// foreground classes zeroed, each map is max-pooled over non-overlapping
// pool x pool windows (zero padded), flattened and concatenated across
// classes; frame vectors are averaged over the clip and l2-normalized.

#include <algorithm>
#include <set>
#include <vector>

#include "hsc/core.hpp"
#include "hsc/data.hpp"
#include "hsc/nn.hpp"

namespace hsc {

inline int pooled_extent(int n, int pool) { return (n + pool - 1) / pool; }

inline int scene_feature_dim(int num_classes, int h, int w, int pool) {
    return num_classes * pooled_extent(h, pool) * pooled_extent(w, pool);
}

inline Vec build_scene_feature(const std::vector<SegGrid>& grids, int num_classes,
                               const std::vector<int>& foreground_classes, int pool) {
    if (grids.empty()) throw ShapeError("build_scene_feature: no frames");
    if (pool <= 0) throw ConfigError("build_scene_feature: pool size must be positive");
    const int h = grids[0].h, w = grids[0].w;
    for (const auto& g : grids)
        if (g.h != h || g.w != w) throw ShapeError("build_scene_feature: inconsistent grid shapes");
    const std::set<int> fg(foreground_classes.begin(), foreground_classes.end());
    const int ph = pooled_extent(h, pool), pw = pooled_extent(w, pool);
    const int dim = num_classes * ph * pw;

    // Max-pool per frame, then average the pooled maps over the clip.
    Vec acc(static_cast<size_t>(dim), 0.0);
    Vec pooled(static_cast<size_t>(dim), 0.0);
    for (const auto& g : grids) {
        std::fill(pooled.begin(), pooled.end(), 0.0);
        for (int r = 0; r < h; ++r) {
            const int pr = r / pool;
            for (int cc = 0; cc < w; ++cc) {
                const int c = g.at(r, cc);
                if (c < 0 || c >= num_classes) throw ShapeError("build_scene_feature: class id out of range");
                if (fg.count(c)) continue;
                pooled[c * ph * pw + pr * pw + cc / pool] = 1.0;
            }
        }
        for (int i = 0; i < dim; ++i) acc[i] += pooled[i];
    }
    const double inv = 1.0 / static_cast<double>(grids.size());
    for (double& v : acc) v *= inv;
    if (norm2(acc) <= kNormFloor)
        throw DegenerateInputError("build_scene_feature: all frames masked to zero");
    return l2_normalize(acc);
}

// Density-based clustering over unit vectors with distance 1 - cos.
// Deterministic: points are visited in index order, neighbor expansion in
// index order, cluster ids assigned in order of discovery. -1 marks noise.
inline std::vector<int> dbscan_cluster(const std::vector<Vec>& points, double eps, int min_pts) {
    if (eps <= 0.0) throw ConfigError("dbscan: eps must be positive");
    if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
    const int n = static_cast<int>(points.size());
    std::vector<std::vector<int>> neighbors(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (1.0 - cosine_similarity(points[i], points[j]) <= eps) neighbors[i].push_back(j);
        }
    }
    std::vector<int> label(n, -2);  // -2 unvisited, -1 noise
    int next_cluster = 0;
    for (int i = 0; i < n; ++i) {
        if (label[i] != -2) continue;
        if (static_cast<int>(neighbors[i].size()) < min_pts) {
            label[i] = -1;
            continue;
        }
        const int cid = next_cluster++;
        label[i] = cid;
        std::vector<int> frontier = neighbors[i];
        for (size_t k = 0; k < frontier.size(); ++k) {
            const int j = frontier[k];
            if (label[j] == -1) label[j] = cid;  // border point
            if (label[j] != -2) continue;
            label[j] = cid;
            if (static_cast<int>(neighbors[j].size()) >= min_pts)
                frontier.insert(frontier.end(), neighbors[j].begin(), neighbors[j].end());
        }
    }
    return label;
}

struct SceneClustering {
    double eps = 0.15;
    int min_pts = 3;
    std::vector<int> labels;  // final per-clip labels, >= 0
    Matrix centroids;         // num_clusters x d_scene, unit rows
    bool fallback_single_cluster = false;

    int num_scenes() const { return centroids.rows; }
};

inline int nearest_centroid(const Matrix& centroids, const Vec& v) {
    int best = 0;
    double best_sim = -2.0;
    for (int c = 0; c < centroids.rows; ++c) {
        double s = 0.0;
        for (int j = 0; j < centroids.cols; ++j) s += centroids(c, j) * v[j];
        if (s > best_sim + 1e-15) {  // ties keep the lower index
            best_sim = s;
            best = c;
        }
    }
    return best;
}

// Cluster the training scene features and give every clip a final label:
// core/border members keep their cluster, noise joins the nearest centroid.
// Returns the clustering; `features` must be unit vectors, one per clip.
inline SceneClustering cluster_scene_features(const std::vector<Vec>& features, double eps,
                                              int min_pts) {
    if (features.empty()) throw UsageError("cluster_scene_features: no clips");
    SceneClustering sc;
    sc.eps = eps;
    sc.min_pts = min_pts;
    std::vector<int> raw = dbscan_cluster(features, eps, min_pts);
    int num_clusters = 0;
    for (int l : raw) num_clusters = std::max(num_clusters, l + 1);

    const int dim = isize(features[0]);
    if (num_clusters == 0) {
        // all noise: fall back to one cluster over everything
        sc.fallback_single_cluster = true;
        Vec mean(static_cast<size_t>(dim), 0.0);
        for (const auto& f : features) axpy(1.0, f, mean);
        sc.centroids = Matrix(1, dim);
        Vec c = l2_normalize(mean);
        std::copy(c.begin(), c.end(), sc.centroids.row(0));
        sc.labels.assign(features.size(), 0);
        return sc;
    }

    sc.centroids = Matrix(num_clusters, dim);
    std::vector<int> counts(num_clusters, 0);
    for (size_t i = 0; i < features.size(); ++i) {
        if (raw[i] < 0) continue;
        double* row = sc.centroids.row(raw[i]);
        for (int j = 0; j < dim; ++j) row[j] += features[i][j];
        counts[raw[i]]++;
    }
    for (int c = 0; c < num_clusters; ++c) {
        Vec row(sc.centroids.row(c), sc.centroids.row(c) + dim);
        Vec unit = l2_normalize(row);
        std::copy(unit.begin(), unit.end(), sc.centroids.row(c));
    }

    sc.labels.resize(features.size());
    for (size_t i = 0; i < features.size(); ++i)
        sc.labels[i] = raw[i] >= 0 ? raw[i] : nearest_centroid(sc.centroids, features[i]);
    return sc;
}

// Scene feature for one clip, honoring whichever input variant it carries.
inline Vec clip_scene_feature(const ClipRecord& clip, const Dataset& ds, int pool) {
    if (clip.has_grids())
        return build_scene_feature(clip.seg_grids, ds.num_seg_classes, ds.foreground_classes, pool);
    return l2_normalize(*clip.scene_feature);
}

// Training clips keep their cluster (noise already reassigned inside
// cluster_scene_features).
inline void assign_scene_labels_train(Dataset& ds, const SceneClustering& sc) {
    if (sc.labels.size() != ds.clips.size())
        throw UsageError("assign_scene_labels_train: label count mismatch");
    for (size_t i = 0; i < ds.clips.size(); ++i) ds.clips[i].scene_label = sc.labels[i];
}

// Test clips (or any clip outside the clustering) take the nearest centroid.
inline void assign_scene_labels_by_centroid(Dataset& ds, const SceneClustering& sc,
                                            const std::vector<Vec>& clip_features) {
    if (clip_features.size() != ds.clips.size())
        throw UsageError("assign_scene_labels_by_centroid: feature count mismatch");
    for (size_t i = 0; i < ds.clips.size(); ++i)
        ds.clips[i].scene_label = nearest_centroid(sc.centroids, clip_features[i]);
}

}  // namespace hsc
