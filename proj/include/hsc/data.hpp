#pragma once

// Domain records and newline-delimited JSON persistence.
//
// Dataset file layout: the first line is a header object carrying the split
// and feature dimensions; every following line is a tagged record, either
// {"type":"clip",...} or {"type":"sample",...}. Doubles round-trip exactly
// through the JSON layer.

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsc/core.hpp"

namespace hsc {

using json = nlohmann::json;

struct SkeletonFrame {
    std::vector<std::array<double, 2>> keypoints;  // pixel (x, y), fixed scheme order

    friend bool operator==(const SkeletonFrame&, const SkeletonFrame&) = default;
};

struct TrackletSample {
    std::string video_id;
    int clip_index = 0;
    int object_id = 0;
    Vec appearance;
    std::optional<std::vector<SkeletonFrame>> skeleton_seq;
    std::optional<Vec> motion;
    std::string object_class;
    std::optional<std::string> action_class;
    std::optional<int> anomaly_label;  // test split only

    bool has_motion() const { return motion.has_value(); }

    friend bool operator==(const TrackletSample&, const TrackletSample&) = default;
};

// Integer class-id grid, row-major.
struct SegGrid {
    int h = 0;
    int w = 0;
    std::vector<int> cells;

    int at(int r, int c) const { return cells[static_cast<size_t>(r) * w + c]; }
    int& at(int r, int c) { return cells[static_cast<size_t>(r) * w + c]; }

    friend bool operator==(const SegGrid&, const SegGrid&) = default;
};

struct ClipRecord {
    std::string video_id;
    int clip_index = 0;
    int frame_count = 1;
    std::vector<SegGrid> seg_grids;    // one per frame, or empty when scene_feature is given
    std::optional<Vec> scene_feature;  // precomputed f^B
    std::optional<int> anomaly_label;  // test split only
    int scene_label = -1;              // pseudo label, assigned by clustering

    bool has_grids() const { return !seg_grids.empty(); }

    friend bool operator==(const ClipRecord&, const ClipRecord&) = default;
};

enum class Split { train, test };

inline const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

struct DatasetDims {
    int d_app = 0;
    int d_mot = 0;
    int d_scene = 0;  // 0 until scene features exist (grids not yet pooled)

    friend bool operator==(const DatasetDims&, const DatasetDims&) = default;
};

struct Dataset {
    Split split = Split::train;
    DatasetDims dims;
    std::string keypoint_scheme = "coco17";
    int num_seg_classes = 0;
    std::vector<int> foreground_classes;
    std::vector<ClipRecord> clips;
    std::vector<TrackletSample> samples;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct ClipKey {
    std::string video_id;
    int clip_index = 0;

    auto operator<=>(const ClipKey&) const = default;
};

using ClipLookup = std::map<ClipKey, int>;

inline ClipLookup make_clip_lookup(const Dataset& ds) {
    ClipLookup lut;
    for (size_t i = 0; i < ds.clips.size(); ++i) {
        const auto& c = ds.clips[i];
        auto [it, inserted] = lut.emplace(ClipKey{c.video_id, c.clip_index}, static_cast<int>(i));
        if (!inserted)
            throw ParseError("duplicate clip (" + c.video_id + ", " + std::to_string(c.clip_index) + ")");
    }
    return lut;
}

namespace detail {

inline std::string record_tag(const char* kind, size_t index) {
    return std::string(kind) + " record " + std::to_string(index);
}

inline Vec parse_vec(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected array of numbers");
    Vec v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw ParseError(what + ": non-numeric element");
        v.push_back(x.get<double>());
    }
    if (!all_finite(v)) throw ParseError(what + ": non-finite element");
    return v;
}

}  // namespace detail

// Expected keypoint count per scheme; only coco17 ships by default.
inline int keypoint_count(const std::string& scheme) {
    if (scheme == "coco17") return 17;
    throw ConfigError("unknown keypoint scheme: " + scheme);
}

// Structural validation: dimensions, referential integrity, label presence.
inline void validate_dataset(const Dataset& ds) {
    if (ds.dims.d_app <= 0) throw ParseError("header: d_app must be positive");
    if (ds.dims.d_mot < 0 || ds.dims.d_scene < 0) throw ParseError("header: negative dims");
    const int kp = keypoint_count(ds.keypoint_scheme);

    int grid_h = -1, grid_w = -1;
    for (size_t i = 0; i < ds.clips.size(); ++i) {
        const auto& c = ds.clips[i];
        const std::string tag = detail::record_tag("clip", i);
        if (c.clip_index < 0) throw ParseError(tag + ": clip_index must be >= 0");
        if (c.frame_count < 1) throw ParseError(tag + ": frame_count must be >= 1");
        if (c.has_grids() == c.scene_feature.has_value())
            throw ParseError(tag + ": exactly one of seg_grids/scene_feature required");
        if (c.has_grids()) {
            if (ds.num_seg_classes <= 0)
                throw ParseError(tag + ": seg_grids present but header lacks num_seg_classes");
            if (static_cast<int>(c.seg_grids.size()) != c.frame_count)
                throw ParseError(tag + ": seg_grids count differs from frame_count");
            for (const auto& g : c.seg_grids) {
                if (g.h <= 0 || g.w <= 0 || static_cast<int>(g.cells.size()) != g.h * g.w)
                    throw ParseError(tag + ": malformed grid");
                if (grid_h < 0) {
                    grid_h = g.h;
                    grid_w = g.w;
                } else if (g.h != grid_h || g.w != grid_w) {
                    throw ParseError(tag + ": grid shape differs from rest of dataset");
                }
                for (int v : g.cells)
                    if (v < 0 || v >= ds.num_seg_classes)
                        throw ParseError(tag + ": grid class id out of range");
            }
        } else {
            if (ds.dims.d_scene <= 0)
                throw ParseError(tag + ": scene_feature present but header lacks d_scene");
            if (isize(*c.scene_feature) != ds.dims.d_scene)
                throw ParseError(tag + ": scene_feature dim mismatch");
        }
        if (ds.split == Split::test && !c.anomaly_label.has_value())
            throw ParseError(tag + ": test clip lacks anomaly_label");
        if (ds.split == Split::train && c.anomaly_label.has_value())
            throw ParseError(tag + ": anomaly_label not allowed in train split");
        if (c.anomaly_label && *c.anomaly_label != 0 && *c.anomaly_label != 1)
            throw ParseError(tag + ": anomaly_label must be 0 or 1");
    }

    ClipLookup lut = make_clip_lookup(ds);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        const std::string tag = detail::record_tag("sample", i);
        if (s.clip_index < 0) throw ParseError(tag + ": clip_index must be >= 0");
        if (isize(s.appearance) != ds.dims.d_app)
            throw ParseError(tag + ": appearance dim " + std::to_string(s.appearance.size()) +
                             " != d_app " + std::to_string(ds.dims.d_app));
        if (s.motion) {
            if (ds.dims.d_mot <= 0) throw ParseError(tag + ": motion present but header d_mot is 0");
            if (isize(*s.motion) != ds.dims.d_mot) throw ParseError(tag + ": motion dim mismatch");
        }
        if (s.skeleton_seq) {
            if (s.skeleton_seq->empty()) throw ParseError(tag + ": empty skeleton sequence");
            for (const auto& f : *s.skeleton_seq) {
                if (static_cast<int>(f.keypoints.size()) != kp)
                    throw ParseError(tag + ": keypoint count differs from scheme");
                for (const auto& p : f.keypoints)
                    if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
                        throw ParseError(tag + ": non-finite keypoint");
            }
        }
        if (!lut.count(ClipKey{s.video_id, s.clip_index}))
            throw ParseError(tag + ": dangling clip reference (" + s.video_id + ", " +
                             std::to_string(s.clip_index) + ")");
        if (ds.split == Split::test && !s.anomaly_label.has_value())
            throw ParseError(tag + ": test sample lacks anomaly_label");
        if (ds.split == Split::train && s.anomaly_label.has_value())
            throw ParseError(tag + ": anomaly_label not allowed in train split");
    }
}

inline json clip_to_json(const ClipRecord& c) {
    json j{{"type", "clip"},
           {"video_id", c.video_id},
           {"clip_index", c.clip_index},
           {"frame_count", c.frame_count}};
    if (c.has_grids()) {
        json frames = json::array();
        for (const auto& g : c.seg_grids) {
            json rows = json::array();
            for (int r = 0; r < g.h; ++r) {
                json row = json::array();
                for (int cc = 0; cc < g.w; ++cc) row.push_back(g.at(r, cc));
                rows.push_back(std::move(row));
            }
            frames.push_back(std::move(rows));
        }
        j["seg_grids"] = std::move(frames);
    } else if (c.scene_feature) {
        j["scene_feature"] = *c.scene_feature;
    }
    if (c.anomaly_label) j["anomaly_label"] = *c.anomaly_label;
    return j;
}

inline json sample_to_json(const TrackletSample& s) {
    json j{{"type", "sample"},
           {"video_id", s.video_id},
           {"clip_index", s.clip_index},
           {"object_id", s.object_id},
           {"appearance", s.appearance},
           {"object_class", s.object_class}};
    if (s.skeleton_seq) {
        json frames = json::array();
        for (const auto& f : *s.skeleton_seq) {
            json pts = json::array();
            for (const auto& p : f.keypoints) pts.push_back(json::array({p[0], p[1]}));
            frames.push_back(std::move(pts));
        }
        j["skeleton"] = std::move(frames);
    }
    if (s.motion) j["motion"] = *s.motion;
    if (s.action_class) j["action_class"] = *s.action_class;
    if (s.anomaly_label) j["anomaly_label"] = *s.anomaly_label;
    return j;
}

inline ClipRecord clip_from_json(const json& j, const std::string& tag) {
    ClipRecord c;
    c.video_id = j.at("video_id").get<std::string>();
    c.clip_index = j.at("clip_index").get<int>();
    c.frame_count = j.at("frame_count").get<int>();
    if (j.contains("seg_grids")) {
        for (const auto& frame : j.at("seg_grids")) {
            SegGrid g;
            g.h = static_cast<int>(frame.size());
            for (const auto& row : frame) {
                if (g.w == 0)
                    g.w = static_cast<int>(row.size());
                else if (static_cast<int>(row.size()) != g.w)
                    throw ParseError(tag + ": ragged grid rows");
                for (const auto& v : row) {
                    if (!v.is_number_integer()) throw ParseError(tag + ": grid cell must be integer");
                    g.cells.push_back(v.get<int>());
                }
            }
            c.seg_grids.push_back(std::move(g));
        }
    }
    if (j.contains("scene_feature"))
        c.scene_feature = detail::parse_vec(j.at("scene_feature"), tag + " scene_feature");
    if (j.contains("anomaly_label")) c.anomaly_label = j.at("anomaly_label").get<int>();
    return c;
}

inline TrackletSample sample_from_json(const json& j, const std::string& tag) {
    TrackletSample s;
    s.video_id = j.at("video_id").get<std::string>();
    s.clip_index = j.at("clip_index").get<int>();
    s.object_id = j.at("object_id").get<int>();
    s.appearance = detail::parse_vec(j.at("appearance"), tag + " appearance");
    s.object_class = j.at("object_class").get<std::string>();
    if (j.contains("skeleton")) {
        std::vector<SkeletonFrame> frames;
        for (const auto& fj : j.at("skeleton")) {
            SkeletonFrame f;
            for (const auto& pj : fj) {
                if (!pj.is_array() || pj.size() != 2)
                    throw ParseError(tag + ": keypoint must be [x, y]");
                f.keypoints.push_back({pj[0].get<double>(), pj[1].get<double>()});
            }
            frames.push_back(std::move(f));
        }
        s.skeleton_seq = std::move(frames);
    }
    if (j.contains("motion")) s.motion = detail::parse_vec(j.at("motion"), tag + " motion");
    if (j.contains("action_class")) s.action_class = j.at("action_class").get<std::string>();
    if (j.contains("anomaly_label")) s.anomaly_label = j.at("anomaly_label").get<int>();
    return s;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    json header{{"type", "header"},
                {"format", "hscvad-dataset"},
                {"version", 1},
                {"split", to_string(ds.split)},
                {"d_app", ds.dims.d_app},
                {"d_mot", ds.dims.d_mot},
                {"d_scene", ds.dims.d_scene},
                {"keypoints", ds.keypoint_scheme}};
    if (ds.num_seg_classes > 0) {
        header["num_seg_classes"] = ds.num_seg_classes;
        header["foreground_classes"] = ds.foreground_classes;
    }
    out << header.dump() << '\n';
    for (const auto& c : ds.clips) out << clip_to_json(c).dump() << '\n';
    for (const auto& s : ds.samples) out << sample_to_json(s).dump() << '\n';
    if (!out) throw ParseError("write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset: " + path);
    Dataset ds;
    std::string line;
    size_t line_no = 0;
    size_t clip_count = 0, sample_count = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        const std::string where = path + ":" + std::to_string(line_no);
        try {
            std::string type = j.at("type").get<std::string>();
            if (line_no == 1) {
                if (type != "header") throw ParseError("first line must be the header");
                if (j.value("format", "") != "hscvad-dataset")
                    throw ParseError("unknown dataset format");
                if (j.value("version", 0) != 1) throw ParseError("unsupported dataset version");
                std::string split = j.at("split").get<std::string>();
                if (split == "train")
                    ds.split = Split::train;
                else if (split == "test")
                    ds.split = Split::test;
                else
                    throw ParseError("split must be train or test");
                ds.dims.d_app = j.at("d_app").get<int>();
                ds.dims.d_mot = j.at("d_mot").get<int>();
                ds.dims.d_scene = j.at("d_scene").get<int>();
                ds.keypoint_scheme = j.value("keypoints", "coco17");
                ds.num_seg_classes = j.value("num_seg_classes", 0);
                if (j.contains("foreground_classes"))
                    ds.foreground_classes = j.at("foreground_classes").get<std::vector<int>>();
            } else if (type == "clip") {
                ds.clips.push_back(clip_from_json(j, detail::record_tag("clip", clip_count)));
                ++clip_count;
            } else if (type == "sample") {
                ds.samples.push_back(sample_from_json(j, detail::record_tag("sample", sample_count)));
                ++sample_count;
            } else {
                throw ParseError("unknown record type: " + type);
            }
        } catch (const json::exception& e) {
            throw ParseError(where + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    if (line_no == 0) throw ParseError(path + ": empty file (missing header)");
    validate_dataset(ds);
    return ds;
}

}  // namespace hsc
