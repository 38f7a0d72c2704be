// Scene-aware video anomaly detection at the feature level: synthetic
// benchmark generation, two-stage training, skeleton-based motion
// augmentation, scoring, and diagnostics.
//
// Configuration can come from an INI-style file (--config) with one section
// per subcommand; command-line flags override file values.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "hsc/pipeline.hpp"

namespace {

using hsc::ini_get;
using hsc::IniMap;
using hsc::parse_ini;

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hscvad — scene-aware feature-level video anomaly detection"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "INI config file; flags override its values");

    // Pre-scan for --config so file values become defaults before parsing.
    IniMap ini;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                ini = parse_ini(argv[i + 1]);
            } catch (const hsc::Error& e) {
                std::cerr << hsc::json{{"error", e.what()}}.dump() << '\n';
                return 1;
            }
        }
    }

    // ---- gen ----
    hsc::GenOptions gen;
    ini_get(ini, "gen.seed", gen.scenario.seed);
    ini_get(ini, "gen.scenes", gen.scenario.num_scenes);
    ini_get(ini, "gen.train_clips_per_scene", gen.scenario.train_clips_per_scene);
    ini_get(ini, "gen.test_clips_per_scene", gen.scenario.test_clips_per_scene);
    ini_get(ini, "gen.anomaly_clip_fraction", gen.scenario.anomaly_clip_fraction);
    ini_get(ini, "gen.clips_per_video", gen.scenario.clips_per_video);
    ini_get(ini, "gen.frames_per_clip", gen.scenario.frames_per_clip);
    ini_get(ini, "gen.noise", gen.scenario.noise);
    ini_get(ini, "gen.scene_offset_scale", gen.scenario.scene_offset_scale);
    ini_get(ini, "gen.d_app", gen.scenario.d_app);
    ini_get(ini, "gen.out", gen.out_dir);
    auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic mixture benchmark");
    cmd_gen->add_option("--out", gen.out_dir, "parent dir for the auto-named run dir");
    cmd_gen->add_option("--run-dir", gen.run_dir, "exact output dir (overrides --out)");
    cmd_gen->add_option("--seed", gen.scenario.seed, "generator seed");
    cmd_gen->add_option("--scenes", gen.scenario.num_scenes, "number of scenes (default scenario)");
    cmd_gen->add_option("--train-clips", gen.scenario.train_clips_per_scene, "train clips per scene");
    cmd_gen->add_option("--test-clips", gen.scenario.test_clips_per_scene, "test clips per scene");
    cmd_gen->add_option("--anomaly-fraction", gen.scenario.anomaly_clip_fraction,
                        "fraction of test clips with a planted anomaly");
    cmd_gen->add_option("--clips-per-video", gen.scenario.clips_per_video);
    cmd_gen->add_option("--frames-per-clip", gen.scenario.frames_per_clip);
    cmd_gen->add_option("--noise", gen.scenario.noise, "appearance noise sigma");
    cmd_gen->add_option("--scene-offset", gen.scenario.scene_offset_scale);
    cmd_gen->add_option("--d-app", gen.scenario.d_app);

    // ---- train ----
    hsc::TrainOptions train;
    std::string train_variant = "full";
    ini_get(ini, "train.data", train.data_path);
    ini_get(ini, "train.out", train.out_dir);
    ini_get(ini, "train.tau", train.train.tau);
    ini_get(ini, "train.momentum", train.train.momentum);
    ini_get(ini, "train.lr", train.train.lr);
    ini_get(ini, "train.batch_size", train.train.batch_size);
    ini_get(ini, "train.epochs", train.train.epochs);
    ini_get(ini, "train.d_e", train.train.d_e);
    ini_get(ini, "train.seed", train.train.seed);
    ini_get(ini, "train.scene_eps", train.scene_eps);
    ini_get(ini, "train.scene_min_pts", train.scene_min_pts);
    ini_get(ini, "train.pool", train.pool);
    ini_get(ini, "train.variant", train_variant);
    auto* cmd_train = app.add_subcommand("train", "stage-1 training on a train split");
    cmd_train->add_option("--data", train.data_path, "train-split dataset (jsonl)");
    cmd_train->add_option("--out", train.out_dir);
    cmd_train->add_option("--run-dir", train.run_dir);
    cmd_train->add_option("--tau", train.train.tau, "contrastive temperature");
    cmd_train->add_option("--momentum", train.train.momentum, "memory momentum m");
    cmd_train->add_option("--lr", train.train.lr);
    cmd_train->add_option("--batch", train.train.batch_size);
    cmd_train->add_option("--epochs", train.train.epochs);
    cmd_train->add_option("--d-e", train.train.d_e, "latent dimension");
    cmd_train->add_option("--enc-hidden", train.train.enc_hidden);
    cmd_train->add_option("--dec-hidden", train.train.dec_hidden);
    cmd_train->add_option("--seed", train.train.seed);
    cmd_train->add_option("--scene-eps", train.scene_eps, "DBSCAN cosine-distance eps");
    cmd_train->add_option("--scene-min-pts", train.scene_min_pts);
    cmd_train->add_option("--pool", train.pool, "scene max-pool window");
    cmd_train->add_option("--variant", train_variant, "full | plain-ae");
    cmd_train->add_flag("--quiet", train.quiet);

    // ---- augment ----
    hsc::AugmentOptions aug;
    std::string aug_mode = "ma+";
    double angle_deg = 30.0;
    ini_get(ini, "augment.data", aug.data_path);
    ini_get(ini, "augment.checkpoint", aug.checkpoint_path);
    ini_get(ini, "augment.out", aug.out_dir);
    ini_get(ini, "augment.mode", aug_mode);
    ini_get(ini, "augment.p_st", aug.mild.p_st);
    ini_get(ini, "augment.p_tc", aug.mild.p_tc);
    ini_get(ini, "augment.angle_deg", angle_deg);
    ini_get(ini, "augment.severe_p_st", aug.severe_p_st);
    ini_get(ini, "augment.severe_angle_lo_deg", aug.severe_angle_lo_deg);
    ini_get(ini, "augment.severe_angle_hi_deg", aug.severe_angle_hi_deg);
    ini_get(ini, "augment.copies_mild", aug.copies_mild);
    ini_get(ini, "augment.copies_severe", aug.copies_severe);
    ini_get(ini, "augment.percentile", aug.label_percentile);
    ini_get(ini, "augment.stage2_epochs", aug.stage2_epochs);
    ini_get(ini, "augment.stage2_lr", aug.stage2_lr);
    ini_get(ini, "augment.seed", aug.seed);
    auto* cmd_aug = app.add_subcommand("augment",
                                       "skeleton augmentation + stage-2 binary classifier");
    cmd_aug->add_option("--data", aug.data_path, "train-split dataset (jsonl)");
    cmd_aug->add_option("--checkpoint", aug.checkpoint_path, "stage-1 checkpoint");
    cmd_aug->add_option("--out", aug.out_dir);
    cmd_aug->add_option("--run-dir", aug.run_dir);
    cmd_aug->add_option("--mode", aug_mode, "ma- (generator flags) | ma+ (pseudo labels)");
    cmd_aug->add_option("--p-st", aug.mild.p_st, "per-keypoint rotation probability");
    cmd_aug->add_option("--p-tc", aug.mild.p_tc, "per-frame drop probability");
    cmd_aug->add_option("--angle-deg", angle_deg, "mild rotation range is +/- this angle");
    cmd_aug->add_option("--min-frames", aug.mild.min_frames);
    cmd_aug->add_option("--severe-p-st", aug.severe_p_st);
    cmd_aug->add_option("--severe-angle-lo-deg", aug.severe_angle_lo_deg);
    cmd_aug->add_option("--severe-angle-hi-deg", aug.severe_angle_hi_deg);
    cmd_aug->add_option("--copies-mild", aug.copies_mild);
    cmd_aug->add_option("--copies-severe", aug.copies_severe);
    cmd_aug->add_option("--percentile", aug.label_percentile, "pseudo-label threshold percentile");
    cmd_aug->add_option("--stage2-epochs", aug.stage2_epochs);
    cmd_aug->add_option("--stage2-lr", aug.stage2_lr);
    cmd_aug->add_option("--stage2-batch", aug.stage2_batch);
    cmd_aug->add_option("--seed", aug.seed);
    cmd_aug->add_flag("--quiet", aug.quiet);

    // ---- eval ----
    hsc::EvalOptions eval;
    ini_get(ini, "eval.data", eval.data_path);
    ini_get(ini, "eval.checkpoint", eval.checkpoint_path);
    ini_get(ini, "eval.out", eval.out_dir);
    ini_get(ini, "eval.smooth_sigma", eval.smooth_sigma_clips);
    ini_get(ini, "eval.memory_size", eval.memory_size);
    ini_get(ini, "eval.memory_seed", eval.memory_seed);
    ini_get(ini, "eval.normalize_streams", eval.normalize_streams);
    auto* cmd_eval = app.add_subcommand("eval", "score a test split and report micro AUC");
    cmd_eval->add_option("--data", eval.data_path, "test-split dataset (jsonl)");
    cmd_eval->add_option("--checkpoint", eval.checkpoint_path);
    cmd_eval->add_option("--out", eval.out_dir);
    cmd_eval->add_option("--run-dir", eval.run_dir);
    cmd_eval->add_option("--smooth-sigma", eval.smooth_sigma_clips,
                         "Gaussian sigma in clips (per video)");
    cmd_eval->add_option("--memory-size", eval.memory_size,
                         "test-time bank subsample size (0 = full)");
    cmd_eval->add_option("--memory-seed", eval.memory_seed);
    cmd_eval->add_flag("--normalize-streams", eval.normalize_streams,
                       "min-max normalize per-stream scores before averaging");

    // ---- inspect ----
    hsc::InspectOptions inspect;
    std::string sizes_csv;
    ini_get(ini, "inspect.data", inspect.data_path);
    ini_get(ini, "inspect.checkpoint", inspect.checkpoint_path);
    ini_get(ini, "inspect.out", inspect.out_dir);
    ini_get(ini, "inspect.memory_sizes", sizes_csv);
    ini_get(ini, "inspect.memory_seed", inspect.memory_seed);
    auto* cmd_inspect = app.add_subcommand(
        "inspect", "scene confusion matrices, memory export, memory-size AUC sweep");
    cmd_inspect->add_option("--data", inspect.data_path, "test-split dataset (jsonl)");
    cmd_inspect->add_option("--checkpoint", inspect.checkpoint_path);
    cmd_inspect->add_option("--out", inspect.out_dir);
    cmd_inspect->add_option("--run-dir", inspect.run_dir);
    cmd_inspect->add_option("--memory-sizes", sizes_csv, "comma-separated sweep sizes");
    cmd_inspect->add_option("--memory-seed", inspect.memory_seed);
    cmd_inspect->add_option("--smooth-sigma", inspect.smooth_sigma_clips);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_gen->parsed()) {
            hsc::GenResult res = hsc::run_gen(gen);
            std::cout << "wrote " << res.train_path << ", " << res.test_path << ", "
                      << res.truth_path << '\n';
        } else if (cmd_train->parsed()) {
            if (train_variant == "full")
                train.variant = hsc::Stage1Variant::full;
            else if (train_variant == "plain-ae")
                train.variant = hsc::Stage1Variant::plain_ae;
            else
                throw hsc::ConfigError("unknown variant: " + train_variant);
            hsc::TrainRunResult res = hsc::run_train(train);
            std::cout << "checkpoint " << res.checkpoint_path << " (" << res.num_scenes
                      << " scenes)\n";
        } else if (cmd_aug->parsed()) {
            if (aug_mode == "ma-")
                aug.mode = hsc::Stage2Mode::ma_minus;
            else if (aug_mode == "ma+")
                aug.mode = hsc::Stage2Mode::ma_plus;
            else
                throw hsc::ConfigError("unknown augment mode: " + aug_mode + " (use ma- or ma+)");
            aug.mild.angle_min = -angle_deg * hsc::kPi / 180.0;
            aug.mild.angle_max = angle_deg * hsc::kPi / 180.0;
            hsc::AugmentRunResult res = hsc::run_augment(aug);
            std::cout << "stage-2 checkpoint " << res.checkpoint_path << " (" << res.augmented
                      << " augmented, " << res.labeled_abnormal << " abnormal)\n";
        } else if (cmd_eval->parsed()) {
            hsc::run_eval(eval);
        } else if (cmd_inspect->parsed()) {
            if (!sizes_csv.empty()) inspect.memory_sizes = parse_int_list(sizes_csv);
            hsc::InspectRunResult res = hsc::run_inspect(inspect);
            std::cout << "scene accuracy app " << res.scene_accuracy_app << ", mot "
                      << res.scene_accuracy_mot << '\n';
        }
    } catch (const hsc::Error& e) {
        std::cerr << hsc::json{{"error", e.what()}}.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << hsc::json{{"error", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
