#pragma once

// Synthetic multi-scene benchmark with planted scene-dependent anomalies.
// Scenes are distinct segmentation-grid layouts; every (object, action) pair
// owns an appearance prototype plus a per-scene offset; skeletons follow
// per-action parametric joint-angle trajectories and motion features come
// from motion_featurize. A planted anomaly is a pair that is absent from its
// scene's training inventory but normal in some other scene.

#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsc/core.hpp"
#include "hsc/data.hpp"
#include "hsc/nn.hpp"
#include "hsc/skeleton.hpp"

namespace hsc {

struct ClassPair {
    std::string object_class;
    std::string action_class;  // empty = object without skeleton/motion

    auto operator<=>(const ClassPair&) const = default;
};

struct SceneSpec {
    std::vector<ClassPair> inventory;
    std::vector<double> frequencies;  // sampling weights, same length as inventory
};

struct AnomalyPlant {
    int scene = 0;
    ClassPair pair;
};

struct ScenarioConfig {
    int num_scenes = 2;
    std::vector<SceneSpec> scenes;        // empty = default two-scene scenario
    std::vector<AnomalyPlant> anomalies;  // empty allowed (no planted anomalies)
    int train_clips_per_scene = 80;
    int test_clips_per_scene = 40;
    double anomaly_clip_fraction = 0.25;
    int anomaly_event_clips = 5;  // planted anomalies span runs of consecutive clips
    int clips_per_video = 10;
    int frames_per_clip = 8;
    int min_objects = 1;
    int max_objects = 3;
    int grid_h = 32;
    int grid_w = 32;
    int num_seg_classes = 8;
    std::vector<int> foreground_classes = {6, 7};
    int d_app = 32;
    double noise = 0.1;               // appearance noise sigma
    double scene_offset_scale = 0.5;  // magnitude of the per-scene appearance offset
    double skeleton_noise = 0.4;      // pixel noise on keypoints
    uint64_t seed = 0;

    void check() const;
};

// Default scenario: pedestrians walk and run everywhere; every scene also
// owns one rarer "special" activity that is absent elsewhere, and each
// scene's test split plants the next scene's special as its anomaly. With
// two scenes: cyclists are normal in scene 0 only and dancers in scene 1
// only, each abnormal in the other scene.
inline void default_scenario(ScenarioConfig& cfg, int num_scenes) {
    // consecutive specials are far apart in motion-feature space, so each
    // planted pair is distinct from everything normal in its host scene
    static const std::vector<ClassPair> roster = {
        {"cyclist", "cycle"}, {"dancer", "dance"}, {"jumper", "jump"}, {"porter", "push"}};
    if (num_scenes < 1 || num_scenes > static_cast<int>(roster.size()))
        throw ConfigError("default scenario supports 1.." + std::to_string(roster.size()) +
                          " scenes; provide explicit SceneSpecs beyond that");
    cfg.num_scenes = num_scenes;
    cfg.scenes.assign(num_scenes, {});
    cfg.anomalies.clear();
    for (int s = 0; s < num_scenes; ++s) {
        cfg.scenes[s].inventory = {{"person", "walk"}, {"person", "run"}, roster[s]};
        cfg.scenes[s].frequencies = {0.55, 0.25, 0.2};
        if (num_scenes > 1) cfg.anomalies.push_back({s, roster[(s + 1) % num_scenes]});
    }
}

inline void ScenarioConfig::check() const {
    if (num_scenes < 1) throw ConfigError("scenario: num_scenes must be >= 1");
    if (static_cast<int>(scenes.size()) != num_scenes)
        throw ConfigError("scenario: one SceneSpec per scene required");
    if (train_clips_per_scene < 1 || test_clips_per_scene < 0)
        throw ConfigError("scenario: clip counts out of range");
    if (clips_per_video < 1 || frames_per_clip < 1) throw ConfigError("scenario: bad video shape");
    if (min_objects < 0 || max_objects < min_objects) throw ConfigError("scenario: bad object range");
    if (anomaly_clip_fraction < 0.0 || anomaly_clip_fraction > 1.0)
        throw ConfigError("scenario: anomaly_clip_fraction must lie in [0, 1]");
    if (grid_h < 4 || grid_w < 4) throw ConfigError("scenario: grid too small");
    if (num_seg_classes < 2) throw ConfigError("scenario: need at least 2 segmentation classes");
    for (int c : foreground_classes)
        if (c < 0 || c >= num_seg_classes) throw ConfigError("scenario: foreground class out of range");
    if (static_cast<int>(foreground_classes.size()) >= num_seg_classes)
        throw ConfigError("scenario: no background classes left");
    if (d_app < 1) throw ConfigError("scenario: d_app must be positive");
    for (int s = 0; s < num_scenes; ++s) {
        const auto& spec = scenes[s];
        if (spec.inventory.empty()) throw ConfigError("scenario: empty inventory for a scene");
        if (spec.frequencies.size() != spec.inventory.size())
            throw ConfigError("scenario: frequency per inventory pair required");
        for (double f : spec.frequencies)
            if (f <= 0.0) throw ConfigError("scenario: frequencies must be positive");
    }
    for (const auto& plant : anomalies) {
        if (plant.scene < 0 || plant.scene >= num_scenes)
            throw ConfigError("scenario: anomaly scene out of range");
        const auto& inv = scenes[plant.scene].inventory;
        if (std::find(inv.begin(), inv.end(), plant.pair) != inv.end())
            throw ConfigError("scenario: planted pair (" + plant.pair.object_class + ", " +
                              plant.pair.action_class + ") already normal in scene " +
                              std::to_string(plant.scene));
        bool elsewhere = false;
        for (int s = 0; s < num_scenes; ++s) {
            if (s == plant.scene) continue;
            const auto& other = scenes[s].inventory;
            elsewhere |= std::find(other.begin(), other.end(), plant.pair) != other.end();
        }
        if (!elsewhere)
            throw ConfigError("scenario: planted pair must be normal in some other scene");
    }
}

struct SampleInfo {
    std::string video_id;
    int clip_index = 0;
    int object_id = 0;
    int scene = 0;
    std::string object_class;
    std::string action_class;
    int label = 0;
};

struct GroundTruth {
    std::vector<int> train_clip_scenes;  // generating scene per train clip row
    std::vector<int> test_clip_scenes;
    std::vector<int> test_clip_labels;
    std::vector<SampleInfo> train_samples;
    std::vector<SampleInfo> test_samples;
};

struct MixtureDataset {
    Dataset train;
    Dataset test;
    GroundTruth truth;
};

namespace synth_detail {

// One Gaussian bump per background class; each cell takes the arg-max class.
// Class ids are rotated per scene so distinct scenes occupy distinct feature
// blocks even under unlucky layouts.
inline SegGrid scene_archetype(const ScenarioConfig& cfg, int scene, Rng rng) {
    std::vector<int> background;
    for (int c = 0; c < cfg.num_seg_classes; ++c)
        if (std::find(cfg.foreground_classes.begin(), cfg.foreground_classes.end(), c) ==
            cfg.foreground_classes.end())
            background.push_back(c);
    const int nb = static_cast<int>(background.size());
    struct Bump {
        double cx, cy, sigma, amp;
    };
    std::vector<Bump> bumps(nb);
    for (auto& b : bumps) {
        b.cx = rng.uniform(0.0, cfg.grid_w);
        b.cy = rng.uniform(0.0, cfg.grid_h);
        b.sigma = rng.uniform(0.2, 0.45) * std::min(cfg.grid_h, cfg.grid_w);
        b.amp = rng.uniform(0.8, 1.2);
    }
    SegGrid g;
    g.h = cfg.grid_h;
    g.w = cfg.grid_w;
    g.cells.resize(static_cast<size_t>(g.h) * g.w);
    for (int r = 0; r < g.h; ++r) {
        for (int c = 0; c < g.w; ++c) {
            int best = 0;
            double best_v = -1.0;
            for (int b = 0; b < nb; ++b) {
                const double dx = c - bumps[b].cx, dy = r - bumps[b].cy;
                const double v =
                    bumps[b].amp * std::exp(-(dx * dx + dy * dy) / (2.0 * bumps[b].sigma * bumps[b].sigma));
                if (v > best_v) {
                    best_v = v;
                    best = b;
                }
            }
            g.at(r, c) = background[(best + scene) % nb];
        }
    }
    return g;
}

// Paint small moving foreground rectangles over the archetype.
inline std::vector<SegGrid> clip_grids(const ScenarioConfig& cfg, const SegGrid& archetype,
                                       Rng& rng) {
    const int n_obj = 1 + rng.uniform_int(3);
    struct Fg {
        int cls, x, y, w, h, dx;
    };
    std::vector<Fg> fgs;
    for (int i = 0; i < n_obj; ++i) {
        Fg f;
        f.cls = cfg.foreground_classes[rng.uniform_int(static_cast<int>(cfg.foreground_classes.size()))];
        f.w = 3 + rng.uniform_int(5);
        f.h = 3 + rng.uniform_int(5);
        f.x = rng.uniform_int(std::max(1, cfg.grid_w - f.w));
        f.y = rng.uniform_int(std::max(1, cfg.grid_h - f.h));
        f.dx = rng.uniform_int(3) - 1;
        fgs.push_back(f);
    }
    std::vector<SegGrid> frames;
    for (int t = 0; t < cfg.frames_per_clip; ++t) {
        SegGrid g = archetype;
        for (const auto& f : fgs) {
            const int x0 = std::clamp(f.x + t * f.dx, 0, cfg.grid_w - 1);
            for (int r = f.y; r < std::min(cfg.grid_h, f.y + f.h); ++r)
                for (int c = x0; c < std::min(cfg.grid_w, x0 + f.w); ++c) g.at(r, c) = f.cls;
        }
        frames.push_back(std::move(g));
    }
    return frames;
}

struct JointMotion {
    int joint;
    double amp;    // sinusoid amplitude (radians)
    double freq;   // cycles per clip
    double phase;  // radians
    double offset; // constant pose offset (radians)
};

// Amplitudes are kept comparable across actions so class identity lives in
// the joint-offset signature and phase structure rather than the feature
// magnitude (reconstruction errors scale with the squared norm); each action
// bends a different set of joints.
inline std::vector<JointMotion> action_profile(const std::string& action) {
    if (action == "walk")
        return {{11, 0.30, 1.0, 0.0, 0.0},  {12, 0.30, 1.0, kPi, 0.0}, {13, 0.35, 1.0, kPi, 0.0},
                {14, 0.35, 1.0, 0.0, 0.0},  {7, 0.25, 1.0, kPi, 0.0},  {8, 0.25, 1.0, 0.0, 0.0}};
    if (action == "run")
        return {{11, 0.42, 1.5, 0.0, 0.15}, {12, 0.42, 1.5, kPi, 0.15}, {13, 0.48, 1.5, kPi, 0.0},
                {14, 0.48, 1.5, 0.0, 0.0},  {7, 0.40, 1.5, kPi, -0.5},  {8, 0.40, 1.5, 0.0, -0.5}};
    if (action == "cycle")
        return {{7, 0.0, 0.0, 0.0, -0.6},   {8, 0.0, 0.0, 0.0, -0.6},  {11, 0.40, 1.0, 0.0, 0.9},
                {12, 0.40, 1.0, kPi, 0.9},  {13, 0.45, 1.0, kPi / 2, 0.9}, {14, 0.45, 1.0, kPi * 1.5, 0.9}};
    if (action == "push")
        return {{7, 0.0, 0.0, 0.0, -1.0},   {8, 0.0, 0.0, 0.0, -1.0},  {9, 0.0, 0.0, 0.0, -0.5},
                {10, 0.0, 0.0, 0.0, -0.5},  {11, 0.25, 1.0, 0.0, 0.0}, {12, 0.25, 1.0, kPi, 0.0},
                {13, 0.28, 1.0, kPi, 0.0},  {14, 0.28, 1.0, 0.0, 0.0}};
    if (action == "skate")
        return {{15, 0.0, 0.0, 0.0, 0.8},   {16, 0.0, 0.0, 0.0, 0.8},  {11, 0.30, 0.75, 0.0, -0.3},
                {12, 0.30, 0.75, kPi, -0.3}, {7, 0.0, 0.0, 0.0, -0.3}, {8, 0.0, 0.0, 0.0, -0.3}};
    if (action == "jump")
        // both legs and both arms in phase, unlike the gait actions
        return {{11, 0.40, 1.0, 0.0, 0.0},  {12, 0.40, 1.0, 0.0, 0.0}, {13, 0.45, 1.0, kPi / 2, -0.7},
                {14, 0.45, 1.0, kPi / 2, -0.7}, {7, 0.40, 1.0, 0.0, 1.1}, {8, 0.40, 1.0, 0.0, 1.1}};
    if (action == "dance")
        return {{9, 0.0, 0.0, 0.0, 1.3},    {10, 0.0, 0.0, 0.0, 1.3},  {7, 0.35, 0.5, kPi / 2, 0.8},
                {8, 0.35, 0.5, kPi * 1.5, 0.8}, {5, 0.30, 0.5, 0.0, 0.0}, {6, 0.30, 0.5, kPi, 0.0}};
    // unknown actions: gentle sway, still deterministic
    return {{5, 0.1, 1.0, 0.0, 0.0}, {6, 0.1, 1.0, kPi, 0.0}};
}

inline SkeletonFrame canonical_pose() {
    const double pts[17][2] = {
        {0, 0},   {3, -3},   {-3, -3}, {6, -2},   {-6, -2},  {10, 12}, {-10, 12}, {14, 28},
        {-14, 28}, {16, 44}, {-16, 44}, {7, 45},  {-7, 45},  {8, 70},  {-8, 70},  {9, 95},
        {-9, 95}};
    SkeletonFrame f;
    f.keypoints.resize(17);
    for (int k = 0; k < 17; ++k) f.keypoints[k] = {pts[k][0], pts[k][1]};
    return f;
}

inline std::vector<SkeletonFrame> make_skeleton(const ScenarioConfig& cfg,
                                                const std::string& action, Rng& rng) {
    const auto& tree = KinematicTree::coco17();
    const auto profile = action_profile(action);
    const double phase0 = rng.uniform(0.0, 2.0 * kPi);
    const double amp_scale = rng.uniform(0.9, 1.1);
    const double scale = rng.uniform(0.8, 1.3);
    const double x0 = rng.uniform(20.0, 120.0), y0 = rng.uniform(10.0, 60.0);
    const double vx = rng.uniform(-2.0, 2.0);

    std::vector<SkeletonFrame> seq;
    for (int t = 0; t < cfg.frames_per_clip; ++t) {
        SkeletonFrame f = canonical_pose();
        // rotations applied parents-first so descendant offsets compose
        for (int k : tree.topo) {
            for (const auto& jm : profile) {
                if (jm.joint != k) continue;
                const double angle =
                    jm.offset + amp_scale * jm.amp *
                                    std::sin(2.0 * kPi * jm.freq * t / cfg.frames_per_clip +
                                             jm.phase + phase0);
                apply_subtree_rotation(f, tree, k, angle);
            }
        }
        for (auto& p : f.keypoints) {
            p[0] = p[0] * scale + x0 + vx * t + cfg.skeleton_noise * rng.normal();
            p[1] = p[1] * scale + y0 + cfg.skeleton_noise * rng.normal();
        }
        seq.push_back(std::move(f));
    }
    return seq;
}

inline int weighted_choice(const std::vector<double>& weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = rng.uniform(0.0, total);
    for (size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

// Stable list of every pair named anywhere in the scenario.
inline std::vector<ClassPair> all_pairs(const ScenarioConfig& cfg) {
    std::vector<ClassPair> pairs;
    auto add = [&](const ClassPair& p) {
        if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
    };
    for (const auto& spec : cfg.scenes)
        for (const auto& p : spec.inventory) add(p);
    for (const auto& plant : cfg.anomalies) add(plant.pair);
    return pairs;
}

}  // namespace synth_detail

inline MixtureDataset generate_mixture_dataset(ScenarioConfig cfg) {
    using namespace synth_detail;
    if (cfg.scenes.empty()) {
        if (!cfg.anomalies.empty())
            throw ConfigError("scenario: explicit anomalies need explicit SceneSpecs");
        default_scenario(cfg, cfg.num_scenes);
    }
    cfg.check();

    const Rng root(cfg.seed);
    const auto pairs = all_pairs(cfg);
    auto pair_index = [&](const ClassPair& p) {
        return static_cast<int>(std::find(pairs.begin(), pairs.end(), p) - pairs.begin());
    };

    // appearance prototypes and per-scene offsets, drawn once
    std::vector<Vec> proto(pairs.size());
    std::vector<std::vector<Vec>> offset(pairs.size(), std::vector<Vec>(cfg.num_scenes));
    for (size_t p = 0; p < pairs.size(); ++p) {
        Rng r = root.fork(1000 + p);
        Vec u(cfg.d_app);
        for (double& x : u) x = r.normal();
        proto[p] = l2_normalize(u);
        for (int s = 0; s < cfg.num_scenes; ++s) {
            Vec o(cfg.d_app);
            for (double& x : o) x = r.normal();
            o = l2_normalize(o);
            for (double& x : o) x *= cfg.scene_offset_scale;
            offset[p][s] = std::move(o);
        }
    }

    std::vector<SegGrid> archetypes;
    for (int s = 0; s < cfg.num_scenes; ++s)
        archetypes.push_back(scene_archetype(cfg, s, root.fork(2000 + s)));

    const int d_mot = motion_feature_dim(KinematicTree::coco17());

    MixtureDataset out;
    for (Dataset* ds : {&out.train, &out.test}) {
        ds->dims = {cfg.d_app, d_mot, 0};
        ds->keypoint_scheme = "coco17";
        ds->num_seg_classes = cfg.num_seg_classes;
        ds->foreground_classes = cfg.foreground_classes;
    }
    out.train.split = Split::train;
    out.test.split = Split::test;

    auto appearance_of = [&](const ClassPair& pair, int scene, Rng& rng) {
        const int p = pair_index(pair);
        Vec a = proto[p];
        axpy(1.0, offset[p][scene], a);
        for (double& x : a) x += cfg.noise * rng.normal();
        return a;
    };

    auto emit_sample = [&](Dataset& ds, GroundTruth& truth, bool is_test, const std::string& vid,
                           int clip_idx, int obj_id, int scene, const ClassPair& pair, int label,
                           Rng& rng) {
        TrackletSample s;
        s.video_id = vid;
        s.clip_index = clip_idx;
        s.object_id = obj_id;
        s.object_class = pair.object_class;
        s.appearance = appearance_of(pair, scene, rng);
        if (!pair.action_class.empty()) {
            s.action_class = pair.action_class;
            auto skel = make_skeleton(cfg, pair.action_class, rng);
            s.motion = motion_featurize(skel, KinematicTree::coco17());
            s.skeleton_seq = std::move(skel);
        }
        if (is_test) s.anomaly_label = label;
        SampleInfo info{vid, clip_idx, obj_id, scene, pair.object_class, pair.action_class, label};
        (is_test ? truth.test_samples : truth.train_samples).push_back(std::move(info));
        ds.samples.push_back(std::move(s));
    };

    // ---- train split ----
    for (int scene = 0; scene < cfg.num_scenes; ++scene) {
        Rng rng = root.fork(3000 + scene);
        const auto& spec = cfg.scenes[scene];
        for (int clip = 0; clip < cfg.train_clips_per_scene; ++clip) {
            const int video = clip / cfg.clips_per_video;
            const int clip_idx = clip % cfg.clips_per_video;
            const std::string vid = "s" + std::to_string(scene) + "_train_v" + std::to_string(video);
            ClipRecord c;
            c.video_id = vid;
            c.clip_index = clip_idx;
            c.frame_count = cfg.frames_per_clip;
            c.seg_grids = clip_grids(cfg, archetypes[scene], rng);
            out.train.clips.push_back(std::move(c));
            out.truth.train_clip_scenes.push_back(scene);

            const int n_obj = cfg.min_objects + rng.uniform_int(cfg.max_objects - cfg.min_objects + 1);
            for (int o = 0; o < n_obj; ++o) {
                const auto& pair = spec.inventory[weighted_choice(spec.frequencies, rng)];
                emit_sample(out.train, out.truth, false, vid, clip_idx, o, scene, pair, 0, rng);
            }
        }
    }

    // ---- test split ----
    for (int scene = 0; scene < cfg.num_scenes; ++scene) {
        Rng rng = root.fork(4000 + scene);
        const auto& spec = cfg.scenes[scene];
        std::vector<ClassPair> plants;
        for (const auto& plant : cfg.anomalies)
            if (plant.scene == scene) plants.push_back(plant.pair);

        // Planted anomalies span events of consecutive clips inside one
        // video (anomalous activity persists for a while), so temporal
        // smoothing does not wash them out.
        const int n_anom = plants.empty()
                               ? 0
                               : static_cast<int>(cfg.anomaly_clip_fraction * cfg.test_clips_per_scene + 0.5);
        std::vector<bool> is_anom(cfg.test_clips_per_scene, false);
        std::vector<int> plant_of_clip(cfg.test_clips_per_scene, -1);
        const int num_videos = (cfg.test_clips_per_scene + cfg.clips_per_video - 1) / cfg.clips_per_video;
        std::vector<int> video_ids(num_videos);
        std::iota(video_ids.begin(), video_ids.end(), 0);
        for (size_t i = video_ids.size(); i > 1; --i)
            std::swap(video_ids[i - 1], video_ids[rng.uniform_int(static_cast<int>(i))]);
        int remaining = n_anom;
        int plant_cursor = 0;
        for (size_t pass = 0; remaining > 0 && pass < video_ids.size() * 8; ++pass) {
            const int v = video_ids[pass % video_ids.size()];
            const int vstart = v * cfg.clips_per_video;
            const int vlen = std::min(cfg.clips_per_video, cfg.test_clips_per_scene - vstart);
            const int run = std::min({cfg.anomaly_event_clips, remaining, vlen});
            std::vector<int> starts;
            for (int st = 0; st + run <= vlen; ++st) {
                bool free_slot = true;
                for (int k = 0; k < run; ++k) free_slot &= !is_anom[vstart + st + k];
                if (free_slot) starts.push_back(st);
            }
            if (starts.empty()) continue;
            const int st = starts[rng.uniform_int(static_cast<int>(starts.size()))];
            const int plant = plant_cursor++ % static_cast<int>(plants.size());
            for (int k = 0; k < run; ++k) {
                is_anom[vstart + st + k] = true;
                plant_of_clip[vstart + st + k] = plant;
            }
            remaining -= run;
        }
        for (int clip = 0; clip < cfg.test_clips_per_scene; ++clip) {
            const int video = clip / cfg.clips_per_video;
            const int clip_idx = clip % cfg.clips_per_video;
            const std::string vid = "s" + std::to_string(scene) + "_test_v" + std::to_string(video);
            const bool anom = is_anom[clip];
            ClipRecord c;
            c.video_id = vid;
            c.clip_index = clip_idx;
            c.frame_count = cfg.frames_per_clip;
            c.seg_grids = clip_grids(cfg, archetypes[scene], rng);
            c.anomaly_label = anom ? 1 : 0;
            out.test.clips.push_back(std::move(c));
            out.truth.test_clip_scenes.push_back(scene);
            out.truth.test_clip_labels.push_back(anom ? 1 : 0);

            int n_obj = cfg.min_objects + rng.uniform_int(cfg.max_objects - cfg.min_objects + 1);
            int obj_id = 0;
            if (anom) {
                const auto& pair = plants[plant_of_clip[clip]];
                emit_sample(out.test, out.truth, true, vid, clip_idx, obj_id++, scene, pair, 1, rng);
                n_obj = std::max(0, n_obj - 1);
            }
            for (int o = 0; o < n_obj; ++o) {
                const auto& pair = spec.inventory[weighted_choice(spec.frequencies, rng)];
                emit_sample(out.test, out.truth, true, vid, clip_idx, obj_id++, scene, pair, 0, rng);
            }
        }
    }

    validate_dataset(out.train);
    validate_dataset(out.test);
    return out;
}

inline void save_ground_truth(const GroundTruth& gt, const std::string& path) {
    auto samples_json = [](const std::vector<SampleInfo>& v) {
        json arr = json::array();
        for (const auto& s : v)
            arr.push_back(json{{"video_id", s.video_id},
                               {"clip_index", s.clip_index},
                               {"object_id", s.object_id},
                               {"scene", s.scene},
                               {"object_class", s.object_class},
                               {"action_class", s.action_class},
                               {"label", s.label}});
        return arr;
    };
    json j{{"train_clip_scenes", gt.train_clip_scenes},
           {"test_clip_scenes", gt.test_clip_scenes},
           {"test_clip_labels", gt.test_clip_labels},
           {"train_samples", samples_json(gt.train_samples)},
           {"test_samples", samples_json(gt.test_samples)}};
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open for writing: " + path);
    f << j.dump(2) << '\n';
}

inline GroundTruth load_ground_truth(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open ground truth: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("ground truth: ") + e.what());
    }
    GroundTruth gt;
    gt.train_clip_scenes = j.at("train_clip_scenes").get<std::vector<int>>();
    gt.test_clip_scenes = j.at("test_clip_scenes").get<std::vector<int>>();
    gt.test_clip_labels = j.at("test_clip_labels").get<std::vector<int>>();
    auto parse_samples = [](const json& arr) {
        std::vector<SampleInfo> out;
        for (const auto& s : arr)
            out.push_back(SampleInfo{s.at("video_id").get<std::string>(), s.at("clip_index").get<int>(),
                                     s.at("object_id").get<int>(), s.at("scene").get<int>(),
                                     s.at("object_class").get<std::string>(),
                                     s.at("action_class").get<std::string>(), s.at("label").get<int>()});
        return out;
    };
    gt.train_samples = parse_samples(j.at("train_samples"));
    gt.test_samples = parse_samples(j.at("test_samples"));
    return gt;
}

}  // namespace hsc
