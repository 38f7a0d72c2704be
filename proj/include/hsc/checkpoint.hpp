#pragma once

// Checkpoint file: magic "HSCVAD", u32 format version, a JSON metadata blob
// (dims, config snapshot, class tables), then named little-endian arrays
// (f64 or i64) with explicit shapes. Doubles round-trip bit-exactly.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsc/core.hpp"
#include "hsc/model.hpp"
#include "hsc/train.hpp"

namespace hsc {

struct Checkpoint {
    HscModel model;
    Banks banks;
    Matrix scene_centroids;  // num_scenes x d_scene
    ModelOptState opt;
    TrainConfig train_cfg;
    int pool = 8;  // pooling used for scene features at train time
    bool stage2_active = false;
    ClassTable app_classes, mot_classes;
    std::string keypoint_scheme = "coco17";
};

namespace ckpt_detail {

constexpr char kMagic[6] = {'H', 'S', 'C', 'V', 'A', 'D'};
constexpr uint32_t kVersion = 1;

inline void put_bytes(std::string& out, const void* p, size_t n) {
    out.append(static_cast<const char*>(p), n);
}

inline void put_u16(std::string& out, uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    put_bytes(out, b, 2);
}

inline void put_u32(std::string& out, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    put_bytes(out, b, 4);
}

inline void put_u64(std::string& out, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    put_bytes(out, b, 8);
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    explicit Reader(const std::string& b) : buf(b) {}

    void need(size_t n) const {
        if (pos + n > buf.size()) throw ParseError("checkpoint truncated");
    }
    void raw(void* p, size_t n) {
        need(n);
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    }
    uint16_t u16() {
        need(2);
        uint16_t v = 0;
        for (int i = 1; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(buf[pos + i]);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(buf[pos + i]);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(buf[pos + i]);
        pos += 8;
        return v;
    }
};

struct NamedArray {
    uint8_t dtype = 0;  // 0 = f64, 1 = i64
    std::vector<uint64_t> shape;
    std::vector<double> f64;
    std::vector<int64_t> i64;
};

class ArrayBag {
    std::vector<std::pair<std::string, NamedArray>> arrays_;

public:
    void add(const std::string& name, const Vec& v) {
        NamedArray a;
        a.dtype = 0;
        a.shape = {v.size()};
        a.f64 = v;
        arrays_.emplace_back(name, std::move(a));
    }
    void add(const std::string& name, const Matrix& m) {
        NamedArray a;
        a.dtype = 0;
        a.shape = {static_cast<uint64_t>(m.rows), static_cast<uint64_t>(m.cols)};
        a.f64 = m.a;
        arrays_.emplace_back(name, std::move(a));
    }
    void add(const std::string& name, const std::vector<int>& v) {
        NamedArray a;
        a.dtype = 1;
        a.shape = {v.size()};
        a.i64.assign(v.begin(), v.end());
        arrays_.emplace_back(name, std::move(a));
    }
    void add_mlp(const std::string& prefix, const Mlp2Params& p) {
        add(prefix + ".w1", p.w1);
        add(prefix + ".b1", p.b1);
        add(prefix + ".w2", p.w2);
        add(prefix + ".b2", p.b2);
    }

    void serialize(std::string& out) const {
        put_u32(out, static_cast<uint32_t>(arrays_.size()));
        for (const auto& [name, a] : arrays_) {
            put_u16(out, static_cast<uint16_t>(name.size()));
            put_bytes(out, name.data(), name.size());
            out.push_back(static_cast<char>(a.dtype));
            put_u32(out, static_cast<uint32_t>(a.shape.size()));
            for (uint64_t d : a.shape) put_u64(out, d);
            if (a.dtype == 0) {
                for (double v : a.f64) put_u64(out, std::bit_cast<uint64_t>(v));
            } else {
                for (int64_t v : a.i64) put_u64(out, static_cast<uint64_t>(v));
            }
        }
    }

    static std::map<std::string, NamedArray> parse(Reader& r) {
        std::map<std::string, NamedArray> out;
        const uint32_t count = r.u32();
        for (uint32_t i = 0; i < count; ++i) {
            const uint16_t name_len = r.u16();
            r.need(name_len);
            std::string name(r.buf.data() + r.pos, name_len);
            r.pos += name_len;
            NamedArray a;
            r.raw(&a.dtype, 1);
            const uint32_t ndim = r.u32();
            uint64_t total = 1;
            for (uint32_t d = 0; d < ndim; ++d) {
                a.shape.push_back(r.u64());
                total *= a.shape.back();
            }
            if (a.dtype == 0) {
                a.f64.resize(total);
                for (uint64_t k = 0; k < total; ++k) a.f64[k] = std::bit_cast<double>(r.u64());
            } else if (a.dtype == 1) {
                a.i64.resize(total);
                for (uint64_t k = 0; k < total; ++k) a.i64[k] = static_cast<int64_t>(r.u64());
            } else {
                throw ParseError("checkpoint: unknown dtype for array " + name);
            }
            out.emplace(std::move(name), std::move(a));
        }
        return out;
    }
};

inline const NamedArray& pick(const std::map<std::string, NamedArray>& bag, const std::string& name) {
    auto it = bag.find(name);
    if (it == bag.end()) throw ParseError("checkpoint: missing array " + name);
    return it->second;
}

inline Vec as_vec(const std::map<std::string, NamedArray>& bag, const std::string& name) {
    const auto& a = pick(bag, name);
    if (a.dtype != 0 || a.shape.size() != 1) throw ParseError("checkpoint: " + name + " is not a vector");
    return a.f64;
}

inline Matrix as_matrix(const std::map<std::string, NamedArray>& bag, const std::string& name) {
    const auto& a = pick(bag, name);
    if (a.dtype != 0 || a.shape.size() != 2) throw ParseError("checkpoint: " + name + " is not a matrix");
    Matrix m(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]));
    m.a = a.f64;
    return m;
}

inline std::vector<int> as_ints(const std::map<std::string, NamedArray>& bag, const std::string& name) {
    const auto& a = pick(bag, name);
    if (a.dtype != 1 || a.shape.size() != 1) throw ParseError("checkpoint: " + name + " is not an int vector");
    return std::vector<int>(a.i64.begin(), a.i64.end());
}

inline Mlp2Params as_mlp(const std::map<std::string, NamedArray>& bag, const std::string& prefix) {
    Mlp2Params p;
    p.w1 = as_matrix(bag, prefix + ".w1");
    p.b1 = as_vec(bag, prefix + ".b1");
    p.w2 = as_matrix(bag, prefix + ".w2");
    p.b2 = as_vec(bag, prefix + ".b2");
    p.check_consistent();
    return p;
}

inline void add_bank(ArrayBag& bag, const std::string& prefix, const MemoryBank& b) {
    bag.add(prefix + ".rows", b.rows);
    bag.add(prefix + ".scene_labels", b.scene_labels);
    bag.add(prefix + ".class_ids", b.class_ids);
    bag.add(prefix + ".sample_rows", b.sample_rows);
}

inline MemoryBank read_bank(const std::map<std::string, NamedArray>& bag, const std::string& prefix,
                            double momentum) {
    MemoryBank b;
    b.rows = as_matrix(bag, prefix + ".rows");
    b.scene_labels = as_ints(bag, prefix + ".scene_labels");
    b.class_ids = as_ints(bag, prefix + ".class_ids");
    b.sample_rows = as_ints(bag, prefix + ".sample_rows");
    b.momentum = momentum;
    if (static_cast<int>(b.scene_labels.size()) != b.rows.rows ||
        static_cast<int>(b.class_ids.size()) != b.rows.rows ||
        static_cast<int>(b.sample_rows.size()) != b.rows.rows)
        throw ParseError("checkpoint: bank metadata size mismatch for " + prefix);
    return b;
}

}  // namespace ckpt_detail

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    using namespace ckpt_detail;
    json meta{
        {"d_app", ck.model.dims.d_app},
        {"d_mot", ck.model.dims.d_mot},
        {"d_scene", ck.model.dims.d_scene},
        {"d_e", ck.model.dims.d_e},
        {"enc_hidden", ck.model.dims.enc_hidden},
        {"dec_hidden", ck.model.dims.dec_hidden},
        {"bin_hidden", ck.model.dims.bin_hidden},
        {"num_scenes", ck.model.num_scenes},
        {"tau", ck.train_cfg.tau},
        {"momentum", ck.train_cfg.momentum},
        {"lr", ck.train_cfg.lr},
        {"batch_size", ck.train_cfg.batch_size},
        {"epochs", ck.train_cfg.epochs},
        {"seed", ck.train_cfg.seed},
        {"label_percentile", ck.train_cfg.label_percentile},
        {"stage2_epochs", ck.train_cfg.stage2_epochs},
        {"pool", ck.pool},
        {"stage2_active", ck.stage2_active},
        {"app_classes", ck.app_classes.names},
        {"mot_classes", ck.mot_classes.names},
        {"keypoints", ck.keypoint_scheme},
    };
    std::string meta_str = meta.dump();

    std::string out;
    put_bytes(out, kMagic, sizeof(kMagic));
    put_u32(out, kVersion);
    put_u64(out, meta_str.size());
    put_bytes(out, meta_str.data(), meta_str.size());

    ArrayBag bag;
    bag.add_mlp("enc_app", ck.model.enc_app);
    bag.add_mlp("dec_app", ck.model.dec_app);
    bag.add("lc_app", ck.model.lc_app);
    bag.add_mlp("bin", ck.model.bin);
    bag.add_mlp("opt.enc_app", ck.opt.enc_app.accum);
    bag.add_mlp("opt.dec_app", ck.opt.dec_app.accum);
    bag.add("opt.lc_app", ck.opt.lc_app_accum);
    bag.add_mlp("opt.bin", ck.opt.bin.accum);
    add_bank(bag, "mem_app", ck.banks.app);
    if (ck.model.dims.d_mot > 0) {
        bag.add_mlp("enc_mot", ck.model.enc_mot);
        bag.add_mlp("dec_mot", ck.model.dec_mot);
        bag.add("lc_mot", ck.model.lc_mot);
        bag.add_mlp("opt.enc_mot", ck.opt.enc_mot.accum);
        bag.add_mlp("opt.dec_mot", ck.opt.dec_mot.accum);
        bag.add("opt.lc_mot", ck.opt.lc_mot_accum);
        add_bank(bag, "mem_mot", ck.banks.mot);
    }
    bag.add("scene_centroids", ck.scene_centroids);
    bag.serialize(out);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw ParseError("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    using namespace ckpt_detail;
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open checkpoint: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Reader r(buf);

    char magic[6];
    r.raw(magic, 6);
    if (std::memcmp(magic, kMagic, 6) != 0) throw ParseError("not a HSCVAD checkpoint: " + path);
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw ParseError("unsupported checkpoint version " + std::to_string(version));
    const uint64_t meta_len = r.u64();
    r.need(meta_len);
    json meta;
    try {
        meta = json::parse(buf.substr(r.pos, meta_len));
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint metadata: ") + e.what());
    }
    r.pos += meta_len;

    Checkpoint ck;
    ck.model.dims.d_app = meta.at("d_app").get<int>();
    ck.model.dims.d_mot = meta.at("d_mot").get<int>();
    ck.model.dims.d_scene = meta.at("d_scene").get<int>();
    ck.model.dims.d_e = meta.at("d_e").get<int>();
    ck.model.dims.enc_hidden = meta.at("enc_hidden").get<int>();
    ck.model.dims.dec_hidden = meta.at("dec_hidden").get<int>();
    ck.model.dims.bin_hidden = meta.at("bin_hidden").get<int>();
    ck.model.num_scenes = meta.at("num_scenes").get<int>();
    ck.train_cfg.tau = meta.at("tau").get<double>();
    ck.train_cfg.momentum = meta.at("momentum").get<double>();
    ck.train_cfg.lr = meta.at("lr").get<double>();
    ck.train_cfg.batch_size = meta.at("batch_size").get<int>();
    ck.train_cfg.epochs = meta.at("epochs").get<int>();
    ck.train_cfg.seed = meta.at("seed").get<uint64_t>();
    ck.train_cfg.label_percentile = meta.at("label_percentile").get<double>();
    ck.train_cfg.stage2_epochs = meta.at("stage2_epochs").get<int>();
    ck.pool = meta.at("pool").get<int>();
    ck.stage2_active = meta.at("stage2_active").get<bool>();
    ck.app_classes.names = meta.at("app_classes").get<std::vector<std::string>>();
    ck.mot_classes.names = meta.at("mot_classes").get<std::vector<std::string>>();
    ck.keypoint_scheme = meta.at("keypoints").get<std::string>();

    auto bag = ArrayBag::parse(r);
    ck.model.enc_app = as_mlp(bag, "enc_app");
    ck.model.dec_app = as_mlp(bag, "dec_app");
    ck.model.lc_app = as_matrix(bag, "lc_app");
    ck.model.bin = as_mlp(bag, "bin");
    ck.opt.enc_app.accum = as_mlp(bag, "opt.enc_app");
    ck.opt.dec_app.accum = as_mlp(bag, "opt.dec_app");
    ck.opt.lc_app_accum = as_matrix(bag, "opt.lc_app");
    ck.opt.bin.accum = as_mlp(bag, "opt.bin");
    ck.banks.app = read_bank(bag, "mem_app", ck.train_cfg.momentum);
    if (ck.model.dims.d_mot > 0) {
        ck.model.enc_mot = as_mlp(bag, "enc_mot");
        ck.model.dec_mot = as_mlp(bag, "dec_mot");
        ck.model.lc_mot = as_matrix(bag, "lc_mot");
        ck.opt.enc_mot.accum = as_mlp(bag, "opt.enc_mot");
        ck.opt.dec_mot.accum = as_mlp(bag, "opt.dec_mot");
        ck.opt.lc_mot_accum = as_matrix(bag, "opt.lc_mot");
        ck.banks.mot = read_bank(bag, "mem_mot", ck.train_cfg.momentum);
    }
    ck.scene_centroids = as_matrix(bag, "scene_centroids");
    if (ck.scene_centroids.rows != ck.model.num_scenes ||
        ck.scene_centroids.cols != ck.model.dims.d_scene)
        throw ParseError("checkpoint: centroid shape disagrees with metadata");
    return ck;
}

}  // namespace hsc
