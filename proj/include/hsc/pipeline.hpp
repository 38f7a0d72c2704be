#pragma once

// End-to-end commands behind the CLI: gen, train, augment, eval, inspect.
// Every run lands in a run directory with a manifest (resolved config, seed,
// config hash) sufficient to replay it; input files are never mutated.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "hsc/checkpoint.hpp"
#include "hsc/core.hpp"
#include "hsc/data.hpp"
#include "hsc/model.hpp"
#include "hsc/scene.hpp"
#include "hsc/score.hpp"
#include "hsc/skeleton.hpp"
#include "hsc/synth.hpp"
#include "hsc/train.hpp"

namespace hsc {

// Flat key-value config text: "[section]" headers then "key = value" lines;
// '#' and ';' start comments. Keys flatten to "section.key".
using IniMap = std::map<std::string, std::string>;

inline IniMap parse_ini(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    IniMap out;
    std::string line, section;
    int line_no = 0;
    auto strip = [](const std::string& s) {
        auto a = s.find_first_not_of(" \t\r");
        auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = strip(line);
        if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == ';') continue;
        if (trimmed.front() == '[' && trimmed.back() == ']') {
            section = trimmed.substr(1, trimmed.size() - 2);
            continue;
        }
        auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = strip(trimmed.substr(0, eq));
        std::string value = strip(trimmed.substr(eq + 1));
        out[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

template <typename T>
void ini_get(const IniMap& ini, const std::string& key, T& value) {
    auto it = ini.find(key);
    if (it == ini.end()) return;
    if constexpr (std::is_same_v<T, bool>) {
        const std::string& s = it->second;
        value = (s == "1" || s == "true" || s == "yes" || s == "on");
    } else if constexpr (std::is_same_v<T, std::string>) {
        value = it->second;
    } else {
        std::istringstream ss(it->second);
        T parsed;
        if (!(ss >> parsed)) throw ConfigError("config value for " + key + " is malformed");
        value = parsed;
    }
}

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex16(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

// run_dir wins when given; otherwise <out_dir>/<timestamp>-<hash8>.
inline std::string resolve_run_dir(const std::string& run_dir, const std::string& out_dir,
                                   uint64_t config_hash) {
    std::string dir = run_dir;
    if (dir.empty()) {
        if (out_dir.empty()) throw ConfigError("either --run-dir or --out must be given");
        dir = out_dir + "/" + timestamp_utc() + "-" + hex16(config_hash).substr(0, 8);
    }
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_manifest(const std::string& run_dir, const std::string& command,
                           const json& config) {
    const uint64_t hash = fnv1a64(config.dump());
    json manifest{{"command", command},
                  {"config", config},
                  {"config_hash", hex16(hash)},
                  {"created_utc", timestamp_utc()},
                  {"format_version", 1}};
    std::ofstream f(run_dir + "/manifest.json", std::ios::binary);
    if (!f) throw ParseError("cannot write manifest in " + run_dir);
    f << manifest.dump(2) << '\n';
}

// Samples carrying a skeleton but no motion feature get one from the
// stand-in featurizer; pins d_mot when the header left it open.
inline void ensure_motion_features(Dataset& ds) {
    const auto& tree = tree_for_scheme(ds.keypoint_scheme);
    const int dm = motion_feature_dim(tree);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        auto& s = ds.samples[i];
        if (!s.skeleton_seq || s.motion) continue;
        if (s.skeleton_seq->size() < 2) continue;  // featurizer needs 2 frames
        if (ds.dims.d_mot == 0) ds.dims.d_mot = dm;
        if (ds.dims.d_mot != dm)
            throw ConfigError("dataset d_mot " + std::to_string(ds.dims.d_mot) +
                              " conflicts with the featurizer dim " + std::to_string(dm));
        s.motion = motion_featurize(*s.skeleton_seq, tree);
    }
}

inline std::vector<Vec> all_clip_scene_features(const Dataset& ds, int pool) {
    std::vector<Vec> feats;
    feats.reserve(ds.clips.size());
    for (const auto& c : ds.clips) feats.push_back(clip_scene_feature(c, ds, pool));
    return feats;
}

// ---------------------------------------------------------------- gen ----

struct GenOptions {
    ScenarioConfig scenario;
    std::string out_dir;
    std::string run_dir;
};

struct GenResult {
    std::string run_dir, train_path, test_path, truth_path;
};

inline json scenario_to_json(const ScenarioConfig& c) {
    json scenes = json::array();
    for (const auto& s : c.scenes) {
        json inv = json::array();
        for (const auto& p : s.inventory) inv.push_back({p.object_class, p.action_class});
        scenes.push_back({{"inventory", inv}, {"frequencies", s.frequencies}});
    }
    json plants = json::array();
    for (const auto& a : c.anomalies)
        plants.push_back({{"scene", a.scene}, {"pair", {a.pair.object_class, a.pair.action_class}}});
    return json{{"num_scenes", c.num_scenes},
                {"scenes", scenes},
                {"anomalies", plants},
                {"train_clips_per_scene", c.train_clips_per_scene},
                {"test_clips_per_scene", c.test_clips_per_scene},
                {"anomaly_clip_fraction", c.anomaly_clip_fraction},
                {"clips_per_video", c.clips_per_video},
                {"frames_per_clip", c.frames_per_clip},
                {"min_objects", c.min_objects},
                {"max_objects", c.max_objects},
                {"grid_h", c.grid_h},
                {"grid_w", c.grid_w},
                {"num_seg_classes", c.num_seg_classes},
                {"foreground_classes", c.foreground_classes},
                {"d_app", c.d_app},
                {"noise", c.noise},
                {"scene_offset_scale", c.scene_offset_scale},
                {"skeleton_noise", c.skeleton_noise},
                {"seed", c.seed}};
}

inline GenResult run_gen(const GenOptions& opt) {
    MixtureDataset mix = generate_mixture_dataset(opt.scenario);
    json cfg = scenario_to_json(opt.scenario);
    GenResult res;
    res.run_dir = resolve_run_dir(opt.run_dir, opt.out_dir, fnv1a64(cfg.dump()));
    res.train_path = res.run_dir + "/train.jsonl";
    res.test_path = res.run_dir + "/test.jsonl";
    res.truth_path = res.run_dir + "/ground_truth.json";
    save_dataset(mix.train, res.train_path);
    save_dataset(mix.test, res.test_path);
    save_ground_truth(mix.truth, res.truth_path);
    write_manifest(res.run_dir, "gen", cfg);
    return res;
}

// -------------------------------------------------------------- train ----

struct TrainOptions {
    std::string data_path;
    std::string out_dir;
    std::string run_dir;
    TrainConfig train;
    double scene_eps = 0.15;
    int scene_min_pts = 3;
    int pool = 8;
    Stage1Variant variant = Stage1Variant::full;
    bool quiet = false;
};

struct TrainRunResult {
    std::string run_dir, checkpoint_path, history_path;
    int num_scenes = 0;
    double final_mean_loss = 0.0;
};

inline json train_options_to_json(const TrainOptions& o) {
    return json{{"data", o.data_path},
                {"tau", o.train.tau},
                {"momentum", o.train.momentum},
                {"lr", o.train.lr},
                {"batch_size", o.train.batch_size},
                {"epochs", o.train.epochs},
                {"d_e", o.train.d_e},
                {"enc_hidden", o.train.enc_hidden},
                {"dec_hidden", o.train.dec_hidden},
                {"bin_hidden", o.train.bin_hidden},
                {"seed", o.train.seed},
                {"scene_eps", o.scene_eps},
                {"scene_min_pts", o.scene_min_pts},
                {"pool", o.pool},
                {"variant", o.variant == Stage1Variant::full ? "full" : "plain-ae"}};
}

inline TrainRunResult run_train(const TrainOptions& opt) {
    opt.train.check();
    Dataset ds = load_dataset(opt.data_path);
    if (ds.split != Split::train) throw ConfigError("train expects a train-split dataset");
    ensure_motion_features(ds);

    std::vector<Vec> feats = all_clip_scene_features(ds, opt.pool);
    SceneClustering sc = cluster_scene_features(feats, opt.scene_eps, opt.scene_min_pts);
    if (sc.fallback_single_cluster)
        std::cerr << "warning: DBSCAN found no clusters; using a single scene\n";
    assign_scene_labels_train(ds, sc);

    TrainContext ctx = build_train_context(ds, std::move(feats));
    Stage1Result stage1 = train_stage1(ds, ctx, opt.train, opt.variant);

    json cfg = train_options_to_json(opt);
    TrainRunResult res;
    res.run_dir = resolve_run_dir(opt.run_dir, opt.out_dir, fnv1a64(cfg.dump()));
    res.checkpoint_path = res.run_dir + "/checkpoint.bin";
    res.history_path = res.run_dir + "/history.jsonl";
    res.num_scenes = sc.num_scenes();

    std::ofstream hist(res.history_path, std::ios::binary);
    for (const auto& e : stage1.history) {
        const int n = std::max(1, e.samples);
        const int nm = std::max(1, e.motion_samples);
        json line{{"epoch", e.epoch},
                  {"total", e.mean_total},
                  {"rec_app", e.sums.rec_app / n},
                  {"scn_app", e.sums.scn_app / n},
                  {"obj_app", e.sums.obj_app / n},
                  {"lc_app", e.sums.lc_app / n},
                  {"rec_mot", e.sums.rec_mot / nm},
                  {"scn_mot", e.sums.scn_mot / nm},
                  {"obj_mot", e.sums.obj_mot / nm},
                  {"lc_mot", e.sums.lc_mot / nm},
                  {"skipped_scn", e.sums.skipped_scn},
                  {"skipped_obj", e.sums.skipped_obj}};
        hist << line.dump() << '\n';
        if (!opt.quiet) std::cout << line.dump() << '\n';
    }
    if (!stage1.history.empty()) res.final_mean_loss = stage1.history.back().mean_total;

    Checkpoint ck;
    ck.model = std::move(stage1.model);
    ck.banks = std::move(stage1.banks);
    ck.opt = std::move(stage1.opt);
    ck.scene_centroids = sc.centroids;
    ck.train_cfg = opt.train;
    ck.pool = opt.pool;
    ck.stage2_active = false;
    ck.app_classes = ctx.app_classes;
    ck.mot_classes = ctx.mot_classes;
    ck.keypoint_scheme = ds.keypoint_scheme;
    save_checkpoint(ck, res.checkpoint_path);
    write_manifest(res.run_dir, "train", cfg);
    return res;
}

// ------------------------------------------------------------ augment ----

enum class Stage2Mode { off, ma_minus, ma_plus };

inline const char* to_string(Stage2Mode m) {
    switch (m) {
        case Stage2Mode::off: return "off";
        case Stage2Mode::ma_minus: return "ma-";
        default: return "ma+";
    }
}

struct AugmentOptions {
    std::string data_path;        // training split
    std::string checkpoint_path;  // stage-1 checkpoint
    std::string out_dir;
    std::string run_dir;
    AugmentConfig mild;                  // in-range transforms, flagged normal
    double severe_p_st = 0.9;            // widened transforms, flagged abnormal
    double severe_angle_lo_deg = 90.0;
    double severe_angle_hi_deg = 180.0;
    int copies_mild = 1;
    int copies_severe = 1;
    Stage2Mode mode = Stage2Mode::ma_plus;  // ma-: generator flags; ma+: pseudo labels
    double label_percentile = 95.0;
    int stage2_epochs = 30;
    double stage2_lr = 0.01;
    int stage2_batch = 128;
    uint64_t seed = 0;
    bool quiet = false;
};

struct AugmentRunResult {
    std::string run_dir, checkpoint_path, pool_path, replay_path;
    int augmented = 0;
    int labeled_abnormal = 0;
    double threshold = 0.0;  // ma+ only
    double stage2_accuracy = 0.0;
};

inline json augment_options_to_json(const AugmentOptions& o) {
    return json{{"data", o.data_path},
                {"checkpoint", o.checkpoint_path},
                {"p_st", o.mild.p_st},
                {"p_tc", o.mild.p_tc},
                {"angle_min", o.mild.angle_min},
                {"angle_max", o.mild.angle_max},
                {"min_frames", o.mild.min_frames},
                {"severe_p_st", o.severe_p_st},
                {"severe_angle_lo_deg", o.severe_angle_lo_deg},
                {"severe_angle_hi_deg", o.severe_angle_hi_deg},
                {"copies_mild", o.copies_mild},
                {"copies_severe", o.copies_severe},
                {"mode", to_string(o.mode)},
                {"label_percentile", o.label_percentile},
                {"stage2_epochs", o.stage2_epochs},
                {"stage2_lr", o.stage2_lr},
                {"stage2_batch", o.stage2_batch},
                {"seed", o.seed}};
}

inline AugmentRunResult run_augment(const AugmentOptions& opt) {
    if (opt.mode == Stage2Mode::off) throw ConfigError("augment: mode off does nothing");
    if (opt.checkpoint_path.empty() || !std::filesystem::exists(opt.checkpoint_path))
        throw ConfigError("missing checkpoint: " + opt.checkpoint_path);
    Checkpoint ck = load_checkpoint(opt.checkpoint_path);
    if (ck.model.dims.d_mot <= 0)
        throw ConfigError("augment: checkpoint has no motion stream to refine");
    Dataset ds = load_dataset(opt.data_path);
    if (ds.split != Split::train) throw ConfigError("augment expects the training split");
    ensure_motion_features(ds);

    std::vector<Vec> feats = all_clip_scene_features(ds, ck.pool);
    assign_scene_labels_by_centroid(ds, SceneClustering{0, 0, {}, ck.scene_centroids, false}, feats);
    TrainContext ctx = build_train_context(ds, std::move(feats));

    const auto& tree = tree_for_scheme(ds.keypoint_scheme);
    AugmentConfig severe = opt.mild;
    severe.p_st = opt.severe_p_st;
    severe.angle_min = opt.severe_angle_lo_deg * kPi / 180.0;
    severe.angle_max = opt.severe_angle_hi_deg * kPi / 180.0;

    json cfg = augment_options_to_json(opt);
    AugmentRunResult res;
    res.run_dir = resolve_run_dir(opt.run_dir, opt.out_dir, fnv1a64(cfg.dump()));
    res.pool_path = res.run_dir + "/augmented.jsonl";
    res.replay_path = res.run_dir + "/replay.jsonl";
    res.checkpoint_path = res.run_dir + "/checkpoint.bin";

    std::ofstream pool_out(res.pool_path, std::ios::binary);
    std::ofstream replay_out(res.replay_path, std::ios::binary);
    const Rng root(opt.seed);
    std::vector<AugmentedSample> augmented;

    const int copies_total = opt.copies_mild + opt.copies_severe;
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        if (!s.skeleton_seq || s.skeleton_seq->size() < 2) continue;
        for (int c = 0; c < copies_total; ++c) {
            const bool is_severe = c >= opt.copies_mild;
            Rng rng = root.fork(i * static_cast<size_t>(copies_total) + c);
            AugmentTrace trace;
            auto aug = augment_tracklet(*s.skeleton_seq, tree, is_severe ? severe : opt.mild, rng,
                                        &trace);
            if (aug.size() < 2) continue;
            AugmentedSample a;
            a.source_sample = static_cast<int>(i);
            a.motion = motion_featurize(aug, tree);
            a.severe = is_severe;
            augmented.push_back(a);

            json rot = json::array();
            for (size_t f = 0; f < trace.rotations.size(); ++f)
                for (const auto& d : trace.rotations[f])
                    rot.push_back(json::array({static_cast<int>(f), d.keypoint, d.angle}));
            replay_out << json{{"sample", i},
                               {"copy", c},
                               {"severity", is_severe ? "severe" : "mild"},
                               {"rotations", rot},
                               {"kept_frames", trace.kept_frames}}
                              .dump()
                       << '\n';
            pool_out << json{{"sample", i},
                             {"severity", is_severe ? "severe" : "mild"},
                             {"motion", a.motion}}
                            .dump()
                     << '\n';
        }
    }
    if (augmented.empty()) throw UsageError("augment: no augmentable samples (need skeletons)");
    res.augmented = static_cast<int>(augmented.size());

    std::vector<int> labels;
    if (opt.mode == Stage2Mode::ma_plus) {
        labels = pseudo_label_augmented(ck.model, ck.banks, ds, ctx, augmented,
                                        opt.label_percentile, &res.threshold);
    } else {
        labels.reserve(augmented.size());
        for (const auto& a : augmented) labels.push_back(a.severe ? 1 : 0);
    }
    for (int l : labels) res.labeled_abnormal += l;

    // stage-2 training set: original motion latents (normal) + augmented
    std::vector<Vec> latents;
    std::vector<int> head_labels;
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        if (!s.has_motion()) continue;
        const Vec& scene = ctx.clip_scene_features[ctx.clip_of_sample[i]];
        latents.push_back(encode(ck.model, StreamId::mot, scene, *s.motion));
        head_labels.push_back(0);
    }
    for (size_t k = 0; k < augmented.size(); ++k) {
        const Vec& scene = ctx.clip_scene_features[ctx.clip_of_sample[augmented[k].source_sample]];
        latents.push_back(encode(ck.model, StreamId::mot, scene, augmented[k].motion));
        head_labels.push_back(labels[k]);
    }

    TrainConfig s2 = ck.train_cfg;
    s2.stage2_epochs = opt.stage2_epochs;
    s2.lr = opt.stage2_lr;
    s2.batch_size = opt.stage2_batch;
    s2.seed = opt.seed;
    Stage2Result s2res = train_stage2(ck.model, latents, head_labels, s2);
    res.stage2_accuracy = s2res.train_accuracy;
    if (!opt.quiet)
        std::cout << json{{"stage2_accuracy", s2res.train_accuracy},
                          {"stage2_final_loss", s2res.final_mean_loss},
                          {"augmented", res.augmented},
                          {"labeled_abnormal", res.labeled_abnormal}}
                         .dump()
                  << '\n';

    ck.stage2_active = true;
    save_checkpoint(ck, res.checkpoint_path);
    write_manifest(res.run_dir, "augment", cfg);
    return res;
}

// --------------------------------------------------------------- eval ----

struct EvalOptions {
    std::string data_path;  // test split
    std::string checkpoint_path;
    std::string out_dir;
    std::string run_dir;
    double smooth_sigma_clips = 2.0;
    int memory_size = 0;  // 0 = full bank
    uint64_t memory_seed = 0;
    bool normalize_streams = false;  // optional min-max per stream before averaging
    bool quiet = false;
};

struct EvalRunResult {
    std::string run_dir, scores_path, roc_path;
    double auc = 0.0;
    int frames = 0;
};

inline json eval_options_to_json(const EvalOptions& o) {
    return json{{"data", o.data_path},
                {"checkpoint", o.checkpoint_path},
                {"smooth_sigma_clips", o.smooth_sigma_clips},
                {"memory_size", o.memory_size},
                {"memory_seed", o.memory_seed},
                {"normalize_streams", o.normalize_streams}};
}

// Per-sample scores with the banks as given (already subsampled if asked).
inline std::vector<double> object_scores_for_dataset(const HscModel& model, const MemoryBank& app,
                                                     const MemoryBank& mot, const Dataset& ds,
                                                     const std::vector<Vec>& clip_feats,
                                                     bool stage2_active, bool normalize_streams) {
    ClipLookup lut = make_clip_lookup(ds);
    std::vector<ObjectScore> raw;
    raw.reserve(ds.samples.size());
    for (const auto& s : ds.samples) {
        const Vec& scene = clip_feats[lut.at(ClipKey{s.video_id, s.clip_index})];
        raw.push_back(score_object(model, app, mot, scene, s, stage2_active));
    }
    std::vector<double> out(raw.size());
    if (!normalize_streams) {
        for (size_t i = 0; i < raw.size(); ++i) out[i] = raw[i].s;
        return out;
    }
    auto minmax = [](std::vector<double>& xs) {
        if (xs.empty()) return;
        double lo = *std::min_element(xs.begin(), xs.end());
        double hi = *std::max_element(xs.begin(), xs.end());
        const double span = hi - lo;
        for (double& x : xs) x = span > 0.0 ? (x - lo) / span : 0.0;
    };
    std::vector<double> apps(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) apps[i] = raw[i].s_app;
    std::vector<double> mots;
    for (const auto& r : raw)
        if (r.used_motion) mots.push_back(r.s_mot);
    minmax(apps);
    minmax(mots);
    size_t mi = 0;
    for (size_t i = 0; i < raw.size(); ++i)
        out[i] = raw[i].used_motion ? 0.5 * (apps[i] + mots[mi++]) : apps[i];
    return out;
}

inline EvalRunResult run_eval(const EvalOptions& opt) {
    if (opt.checkpoint_path.empty() || !std::filesystem::exists(opt.checkpoint_path))
        throw ConfigError("missing checkpoint: " + opt.checkpoint_path);
    Checkpoint ck = load_checkpoint(opt.checkpoint_path);
    Dataset ds = load_dataset(opt.data_path);
    if (ds.split != Split::test) throw ConfigError("eval expects a test-split dataset");
    ensure_motion_features(ds);

    std::vector<Vec> feats = all_clip_scene_features(ds, ck.pool);

    MemoryBank app = ck.banks.app;
    MemoryBank mot = ck.banks.mot;
    if (opt.memory_size > 0) {
        app = subsample_bank(app, std::min(opt.memory_size, app.size()), opt.memory_seed);
        if (mot.size() > 0)
            mot = subsample_bank(mot, std::min(opt.memory_size, mot.size()), opt.memory_seed + 1);
    }

    std::vector<double> obj_scores = object_scores_for_dataset(
        ck.model, app, mot, ds, feats, ck.stage2_active, opt.normalize_streams);
    std::vector<double> clip_scores = score_clips(ds, obj_scores);
    FrameSeries series = expand_and_smooth(ds, clip_scores, opt.smooth_sigma_clips);
    const double auc = micro_auc(series.smoothed, series.labels);

    json cfg = eval_options_to_json(opt);
    EvalRunResult res;
    res.run_dir = resolve_run_dir(opt.run_dir, opt.out_dir, fnv1a64(cfg.dump()));
    res.scores_path = res.run_dir + "/scores.csv";
    res.roc_path = res.run_dir + "/roc.csv";
    res.auc = auc;
    res.frames = static_cast<int>(series.raw.size());

    {
        std::ofstream f(res.scores_path, std::ios::binary);
        f << "frame_index,video_id,raw,smoothed,label\n";
        f.precision(17);
        for (size_t i = 0; i < series.raw.size(); ++i)
            f << series.frame_of[i] << ',' << series.video_of[i] << ',' << series.raw[i] << ','
              << series.smoothed[i] << ',' << series.labels[i] << '\n';
    }
    {
        std::ofstream f(res.roc_path, std::ios::binary);
        f << "threshold,fpr,tpr\n";
        f.precision(17);
        for (const auto& p : roc_points(series.smoothed, series.labels))
            f << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
    }
    write_manifest(res.run_dir, "eval", cfg);
    if (!opt.quiet) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "AUC %.4f", auc);
        std::cout << buf << " (" << res.frames << " frames)\n";
    }
    return res;
}

// ------------------------------------------------------------- inspect ----

struct InspectOptions {
    std::string data_path;  // test split
    std::string checkpoint_path;
    std::string out_dir;
    std::string run_dir;
    std::vector<int> memory_sizes;  // AUC sweep sizes; empty = {N/4, N/2, N}
    uint64_t memory_seed = 0;
    double smooth_sigma_clips = 2.0;
    bool quiet = false;
};

struct InspectRunResult {
    std::string run_dir;
    std::string confusion_app_path, confusion_mot_path;
    std::string bank_app_path, bank_mot_path, sweep_path;
    double scene_accuracy_app = 0.0;
    double scene_accuracy_mot = 0.0;
};

inline void write_confusion_csv(const std::string& path, const Matrix& m) {
    std::ofstream f(path, std::ios::binary);
    f << "assigned\\predicted";
    for (int c = 0; c < m.cols; ++c) f << ",pred_" << c;
    f << '\n';
    for (int r = 0; r < m.rows; ++r) {
        f << r;
        for (int c = 0; c < m.cols; ++c) f << ',' << m(r, c);
        f << '\n';
    }
}

inline void write_bank_csv(const std::string& path, const MemoryBank& bank,
                           const ClassTable& classes) {
    std::ofstream f(path, std::ios::binary);
    f.precision(17);
    f << "slot,sample,scene,class";
    for (int j = 0; j < bank.dim(); ++j) f << ",e" << j;
    f << '\n';
    for (int i = 0; i < bank.size(); ++i) {
        const int cid = bank.class_ids[i];
        f << i << ',' << bank.sample_rows[i] << ',' << bank.scene_labels[i] << ','
          << (cid >= 0 && cid < static_cast<int>(classes.names.size()) ? classes.names[cid] : "?");
        for (int j = 0; j < bank.dim(); ++j) f << ',' << bank.rows(i, j);
        f << '\n';
    }
}

inline InspectRunResult run_inspect(const InspectOptions& opt) {
    if (opt.checkpoint_path.empty() || !std::filesystem::exists(opt.checkpoint_path))
        throw ConfigError("missing checkpoint: " + opt.checkpoint_path);
    Checkpoint ck = load_checkpoint(opt.checkpoint_path);
    Dataset ds = load_dataset(opt.data_path);
    ensure_motion_features(ds);
    std::vector<Vec> feats = all_clip_scene_features(ds, ck.pool);

    json cfg{{"data", opt.data_path},
             {"checkpoint", opt.checkpoint_path},
             {"memory_sizes", opt.memory_sizes},
             {"memory_seed", opt.memory_seed}};
    InspectRunResult res;
    res.run_dir = resolve_run_dir(opt.run_dir, opt.out_dir, fnv1a64(cfg.dump()));
    res.confusion_app_path = res.run_dir + "/confusion_app.csv";
    res.confusion_mot_path = res.run_dir + "/confusion_mot.csv";
    res.bank_app_path = res.run_dir + "/memory_app.csv";
    res.bank_mot_path = res.run_dir + "/memory_mot.csv";
    res.sweep_path = res.run_dir + "/memory_sweep.csv";

    // scene confusion: rows = centroid-assigned cluster, cols = LC prediction
    ClipLookup lut = make_clip_lookup(ds);
    Matrix conf_app(ck.model.num_scenes, ck.model.num_scenes);
    Matrix conf_mot(ck.model.num_scenes, ck.model.num_scenes);
    double hits_app = 0, n_app = 0, hits_mot = 0, n_mot = 0;
    for (const auto& s : ds.samples) {
        const int clip_row = lut.at(ClipKey{s.video_id, s.clip_index});
        const Vec& scene_feat = feats[clip_row];
        const int assigned = nearest_centroid(ck.scene_centroids, scene_feat);
        {
            Vec latent = encode(ck.model, StreamId::app, scene_feat, s.appearance);
            Vec logits = classify_scene(ck.model, StreamId::app, latent);
            const int pred = static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                                              logits.begin());
            conf_app(assigned, pred) += 1.0;
            hits_app += assigned == pred ? 1.0 : 0.0;
            n_app += 1.0;
        }
        if (s.has_motion() && ck.model.dims.d_mot > 0) {
            Vec latent = encode(ck.model, StreamId::mot, scene_feat, *s.motion);
            Vec logits = classify_scene(ck.model, StreamId::mot, latent);
            const int pred = static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                                              logits.begin());
            conf_mot(assigned, pred) += 1.0;
            hits_mot += assigned == pred ? 1.0 : 0.0;
            n_mot += 1.0;
        }
    }
    write_confusion_csv(res.confusion_app_path, conf_app);
    write_confusion_csv(res.confusion_mot_path, conf_mot);
    res.scene_accuracy_app = n_app > 0 ? hits_app / n_app : 0.0;
    res.scene_accuracy_mot = n_mot > 0 ? hits_mot / n_mot : 0.0;

    write_bank_csv(res.bank_app_path, ck.banks.app, ck.app_classes);
    if (ck.model.dims.d_mot > 0) write_bank_csv(res.bank_mot_path, ck.banks.mot, ck.mot_classes);

    // memory-size AUC sweep
    std::vector<int> sizes = opt.memory_sizes;
    if (sizes.empty()) {
        const int n = ck.banks.app.size();
        sizes = {std::max(1, n / 4), std::max(1, n / 2), n};
    }
    std::ofstream sweep(res.sweep_path, std::ios::binary);
    sweep << "memory_size,auc\n";
    for (int size : sizes) {
        MemoryBank app = subsample_bank(ck.banks.app, std::min(size, ck.banks.app.size()),
                                        opt.memory_seed);
        MemoryBank mot = ck.banks.mot;
        if (mot.size() > 0)
            mot = subsample_bank(mot, std::min(size, mot.size()), opt.memory_seed + 1);
        std::vector<double> obj = object_scores_for_dataset(ck.model, app, mot, ds, feats,
                                                            ck.stage2_active, false);
        FrameSeries series = expand_and_smooth(ds, score_clips(ds, obj), opt.smooth_sigma_clips);
        const double auc = micro_auc(series.smoothed, series.labels);
        sweep << size << ',' << auc << '\n';
        if (!opt.quiet) std::cout << "memory_size " << size << " -> AUC " << auc << '\n';
    }
    write_manifest(res.run_dir, "inspect", cfg);
    return res;
}

}  // namespace hsc
