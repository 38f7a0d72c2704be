#pragma once

// Scene-aware two-stream model: per stream an encoder over the concatenated
// [scene, object] feature with l2-normalized latents, an object-centric
// decoder, and a linear scene-classification head; plus a binary head on
// motion latents and one momentum memory bank per stream.

#include <algorithm>
#include <string>
#include <vector>

#include "hsc/core.hpp"
#include "hsc/nn.hpp"

namespace hsc {

enum class StreamId { app, mot };

inline const char* to_string(StreamId s) { return s == StreamId::app ? "app" : "mot"; }

struct ModelDims {
    int d_app = 0;
    int d_mot = 0;
    int d_scene = 0;
    int d_e = 64;
    int enc_hidden = 0;  // 0 = default_hidden_dim
    int dec_hidden = 0;
    int bin_hidden = 0;

    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct HscModel {
    ModelDims dims;
    int num_scenes = 0;
    Mlp2Params enc_app, enc_mot;  // (d_scene + d_*) -> d_e
    Mlp2Params dec_app, dec_mot;  // d_e -> d_*
    Matrix lc_app, lc_mot;        // num_scenes x d_e
    Mlp2Params bin;               // d_e -> 2, trained in stage 2

    const Mlp2Params& encoder(StreamId s) const { return s == StreamId::app ? enc_app : enc_mot; }
    Mlp2Params& encoder(StreamId s) { return s == StreamId::app ? enc_app : enc_mot; }
    const Mlp2Params& decoder(StreamId s) const { return s == StreamId::app ? dec_app : dec_mot; }
    Mlp2Params& decoder(StreamId s) { return s == StreamId::app ? dec_app : dec_mot; }
    const Matrix& lc(StreamId s) const { return s == StreamId::app ? lc_app : lc_mot; }
    Matrix& lc(StreamId s) { return s == StreamId::app ? lc_app : lc_mot; }
    int obj_dim(StreamId s) const { return s == StreamId::app ? dims.d_app : dims.d_mot; }
};

inline HscModel make_hsc_model(ModelDims dims, int num_scenes, Rng& rng) {
    if (dims.d_app <= 0 || dims.d_scene <= 0 || dims.d_e <= 0)
        throw ShapeError("make_hsc_model: dims must be positive");
    if (num_scenes <= 0) throw ShapeError("make_hsc_model: num_scenes must be positive");
    HscModel m;
    m.dims = dims;
    m.num_scenes = num_scenes;
    auto enc_hidden = [&](int in) { return dims.enc_hidden > 0 ? dims.enc_hidden : default_hidden_dim(in, dims.d_e); };
    auto dec_hidden = [&](int out) { return dims.dec_hidden > 0 ? dims.dec_hidden : default_hidden_dim(dims.d_e, out); };
    m.enc_app = make_mlp2(dims.d_scene + dims.d_app, enc_hidden(dims.d_scene + dims.d_app), dims.d_e, rng);
    m.dec_app = make_mlp2(dims.d_e, dec_hidden(dims.d_app), dims.d_app, rng);
    m.lc_app = init_weight(num_scenes, dims.d_e, rng);
    if (dims.d_mot > 0) {
        m.enc_mot = make_mlp2(dims.d_scene + dims.d_mot, enc_hidden(dims.d_scene + dims.d_mot), dims.d_e, rng);
        m.dec_mot = make_mlp2(dims.d_e, dec_hidden(dims.d_mot), dims.d_mot, rng);
        m.lc_mot = init_weight(num_scenes, dims.d_e, rng);
    }
    int bh = dims.bin_hidden > 0 ? dims.bin_hidden : default_hidden_dim(dims.d_e, 2);
    m.bin = make_mlp2(dims.d_e, bh, 2, rng);
    return m;
}

struct EncodeCache {
    Mlp2Cache mlp;
    L2NormCache norm;
};

// latent = l2_normalize(Phi([scene, obj])); always unit norm.
inline Vec encode(const HscModel& m, StreamId s, const Vec& scene_feat, const Vec& obj_feat,
                  EncodeCache* cache = nullptr) {
    require_dim(scene_feat, m.dims.d_scene, "encode scene feature");
    require_dim(obj_feat, m.obj_dim(s), "encode object feature");
    Vec pre = mlp2_apply(m.encoder(s), concat(scene_feat, obj_feat), cache ? &cache->mlp : nullptr);
    return l2_normalize(pre, cache ? &cache->norm : nullptr);
}

inline Vec decode(const HscModel& m, StreamId s, const Vec& latent, Mlp2Cache* cache = nullptr) {
    require_dim(latent, m.dims.d_e, "decode latent");
    return mlp2_apply(m.decoder(s), latent, cache);
}

inline Vec classify_scene(const HscModel& m, StreamId s, const Vec& latent) {
    require_dim(latent, m.dims.d_e, "classify_scene latent");
    return matvec(m.lc(s), latent);
}

inline Vec softmax(const Vec& logits) {
    double peak = *std::max_element(logits.begin(), logits.end());
    Vec p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - peak);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

// Probability that the motion latent is abnormal (class index 1).
inline double binary_classify(const HscModel& m, const Vec& latent_mot, Mlp2Cache* cache = nullptr) {
    require_dim(latent_mot, m.dims.d_e, "binary_classify latent");
    Vec logits = mlp2_apply(m.bin, latent_mot, cache);
    return softmax(logits)[1];
}

// One unit-norm row per training sample of the stream; rows evolve only via
// the momentum rule, never by gradient.
struct MemoryBank {
    Matrix rows;  // N x d_e
    double momentum = 0.9;
    std::vector<int> scene_labels;  // per slot
    std::vector<int> class_ids;     // per slot, indexes the stream's class table
    std::vector<int> sample_rows;   // originating dataset sample index per slot

    int size() const { return rows.rows; }
    int dim() const { return rows.cols; }

    Vec row_vec(int i) const { return Vec(rows.row(i), rows.row(i) + rows.cols); }
};

// row <- l2_normalize((1 - m) * latent + m * row); m = 1 freezes the row
// exactly (no renormalization drift).
inline void memory_update(MemoryBank& bank, int slot, const Vec& latent) {
    if (slot < 0 || slot >= bank.size()) throw UsageError("memory_update: slot out of range");
    require_dim(latent, bank.dim(), "memory_update latent");
    if (bank.momentum == 1.0) return;
    Vec mixed(bank.dim());
    const double* old_row = bank.rows.row(slot);
    for (int j = 0; j < bank.dim(); ++j)
        mixed[j] = (1.0 - bank.momentum) * latent[j] + bank.momentum * old_row[j];
    Vec unit = l2_normalize(mixed);
    std::copy(unit.begin(), unit.end(), bank.rows.row(slot));
}

struct Retrieval {
    Vec weights;       // softmax over raw dot products, sums to 1
    Vec recon_latent;  // sum_i w_i M(i)
};

inline Retrieval memory_retrieve(const MemoryBank& bank, const Vec& latent) {
    if (bank.size() == 0) throw UsageError("memory_retrieve: empty bank");
    require_dim(latent, bank.dim(), "memory_retrieve latent");
    Vec logits(bank.size());
    for (int i = 0; i < bank.size(); ++i) {
        const double* row = bank.rows.row(i);
        double s = 0.0;
        for (int j = 0; j < bank.dim(); ++j) s += latent[j] * row[j];
        logits[i] = s;
    }
    Retrieval r;
    r.weights = softmax(logits);
    r.recon_latent.assign(bank.dim(), 0.0);
    for (int i = 0; i < bank.size(); ++i) {
        const double* row = bank.rows.row(i);
        for (int j = 0; j < bank.dim(); ++j) r.recon_latent[j] += r.weights[i] * row[j];
    }
    return r;
}

// Uniform random subset of slots (ascending order) for test-time bank
// reduction studies.
inline MemoryBank subsample_bank(const MemoryBank& bank, int keep, uint64_t seed) {
    if (keep <= 0 || keep > bank.size())
        throw UsageError("subsample_bank: keep must be in [1, N]");
    std::vector<int> idx(bank.size());
    for (int i = 0; i < bank.size(); ++i) idx[i] = i;
    Rng rng(seed);
    for (int i = 0; i < keep; ++i) {
        int j = i + rng.uniform_int(bank.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    MemoryBank out;
    out.momentum = bank.momentum;
    out.rows = Matrix(keep, bank.dim());
    for (int i = 0; i < keep; ++i) {
        std::copy(bank.rows.row(idx[i]), bank.rows.row(idx[i]) + bank.dim(), out.rows.row(i));
        out.scene_labels.push_back(bank.scene_labels.at(idx[i]));
        out.class_ids.push_back(bank.class_ids.at(idx[i]));
        out.sample_rows.push_back(bank.sample_rows.at(idx[i]));
    }
    return out;
}

// Stable name -> id table for bank metadata; ids follow first-seen order.
struct ClassTable {
    std::vector<std::string> names;

    int id_of(const std::string& name) {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        names.push_back(name);
        return static_cast<int>(names.size()) - 1;
    }

    int lookup(const std::string& name) const {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }
};

}  // namespace hsc
