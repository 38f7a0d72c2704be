#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "hsc/data.hpp"
#include "oracles.hpp"

using namespace hsc;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<SkeletonFrame> dummy_skeleton(int frames, double offset = 0.0) {
    std::vector<SkeletonFrame> seq(frames);
    for (int f = 0; f < frames; ++f) {
        seq[f].keypoints.resize(17);
        for (int k = 0; k < 17; ++k) seq[f].keypoints[k] = {offset + k * 1.0, f * 2.0 + k};
    }
    return seq;
}

Dataset tiny_dataset(Split split) {
    Dataset ds;
    ds.split = split;
    ds.dims = {3, 2, 4};
    ClipRecord c;
    c.video_id = "v0";
    c.clip_index = 0;
    c.frame_count = 2;
    c.scene_feature = Vec{1.0, 0.0, 0.0, 0.0};
    if (split == Split::test) c.anomaly_label = 0;
    ds.clips.push_back(c);
    TrackletSample s;
    s.video_id = "v0";
    s.clip_index = 0;
    s.object_id = 0;
    s.appearance = {0.1, 0.2, 0.3};
    s.motion = Vec{0.5, -0.5};
    s.skeleton_seq = dummy_skeleton(2);
    s.object_class = "person";
    s.action_class = "walk";
    if (split == Split::test) s.anomaly_label = 1;
    ds.samples.push_back(s);
    return ds;
}

}  // namespace

TEST_CASE("dataset header-only file loads as empty corpus") {
    Dataset ds = tiny_dataset(Split::train);
    ds.clips.clear();
    ds.samples.clear();
    std::string path = temp_path("hsc_empty.jsonl");
    save_dataset(ds, path);
    Dataset back = load_dataset(path);
    CHECK(back.samples.empty());
    CHECK(back.clips.empty());
    CHECK(back.dims == ds.dims);
    std::remove(path.c_str());
}

TEST_CASE("dataset save/load round trip is exact") {
    Rng rng(31);
    Dataset ds = tiny_dataset(Split::train);
    // extra clip with grids and an appearance-only sample with ugly doubles
    ClipRecord grid_clip;
    grid_clip.video_id = "v1";
    grid_clip.clip_index = 3;
    grid_clip.frame_count = 2;
    for (int f = 0; f < 2; ++f) {
        SegGrid g;
        g.h = 4;
        g.w = 4;
        g.cells.assign(16, 0);
        g.at(1, 1) = 1;
        g.at(2, f) = 2;
        grid_clip.seg_grids.push_back(g);
    }
    ds.num_seg_classes = 3;
    ds.foreground_classes = {2};
    ds.clips.push_back(grid_clip);
    TrackletSample s;
    s.video_id = "v1";
    s.clip_index = 3;
    s.object_id = 7;
    s.appearance = {0.1 + 0.2, 1e-300, -0.0};
    for (int i = 0; i < 20; ++i) s.appearance[i % 3] += rng.normal() * 1e-3;
    s.object_class = "cart";
    ds.samples.push_back(s);

    std::string path = temp_path("hsc_roundtrip.jsonl");
    save_dataset(ds, path);
    Dataset back = load_dataset(path);
    CHECK(back == ds);

    // save again: byte-identical files
    std::string path2 = temp_path("hsc_roundtrip2.jsonl");
    save_dataset(back, path2);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("validation rejects appearance dim mismatch naming the record") {
    Dataset ds = tiny_dataset(Split::train);
    ds.samples[0].appearance = {1.0, 2.0};  // d_app is 3
    try {
        validate_dataset(ds);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("sample record 0") != std::string::npos);
    }
}

TEST_CASE("validation rejects dangling clip reference") {
    Dataset ds = tiny_dataset(Split::train);
    ds.samples[0].clip_index = 99;
    CHECK_THROWS_AS(validate_dataset(ds), ParseError);
}

TEST_CASE("validation enforces label policy per split") {
    Dataset train = tiny_dataset(Split::train);
    train.samples[0].anomaly_label = 1;
    CHECK_THROWS_AS(validate_dataset(train), ParseError);

    Dataset test = tiny_dataset(Split::test);
    test.clips[0].anomaly_label.reset();
    CHECK_THROWS_AS(validate_dataset(test), ParseError);
}

TEST_CASE("validation rejects clip with both scene inputs or neither") {
    Dataset ds = tiny_dataset(Split::train);
    ds.clips[0].scene_feature.reset();
    CHECK_THROWS_AS(validate_dataset(ds), ParseError);
}

TEST_CASE("validation rejects wrong keypoint count") {
    Dataset ds = tiny_dataset(Split::train);
    ds.samples[0].skeleton_seq->at(0).keypoints.pop_back();
    CHECK_THROWS_AS(validate_dataset(ds), ParseError);
}

TEST_CASE("load_dataset reports malformed json with line number") {
    std::string path = temp_path("hsc_bad.jsonl");
    {
        std::ofstream out(path);
        out << R"({"type":"header","format":"hscvad-dataset","version":1,"split":"train",)"
            << R"("d_app":3,"d_mot":0,"d_scene":4,"keypoints":"coco17"})" << "\n";
        out << "{not json\n";
    }
    try {
        load_dataset(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_dataset rejects missing file and missing header") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/nope.jsonl"), ParseError);
    std::string path = temp_path("hsc_noheader.jsonl");
    {
        std::ofstream out(path);
        out << R"({"type":"clip","video_id":"v","clip_index":0,"frame_count":1,"scene_feature":[1.0]})"
            << "\n";
    }
    CHECK_THROWS_AS(load_dataset(path), ParseError);
    std::remove(path.c_str());
}
