#pragma once

// Versioned binary model checkpoint. Layout (all integers and reals
// little-endian):
//
//   offset  field
//   0       magic "LNN1" (4 bytes)
//   4       u32  version (1)
//   8       u8   modality tag (caller-defined; 255 = none)
//   9       u8[3] reserved (zero)
//   12      f32  initial learning rate
//   16      u32[3] input shape (h, w, c)
//   28      u32  layer count
//   32      per layer: u8 kind, u8[3] reserved, i32 a, i32 b, i32 c, f32 d
//             conv:    a=filters b=fh c=fw
//             maxpool: a=ph b=pw
//             dense:   a=units
//             dropout: d=rate
//   ...     u64  parameter float count
//   ...     parameter blobs, f32, layers in declaration order, each layer's
//           blocks in declaration order (conv: weights,bias; batchnorm:
//           gamma,beta; dense: weights,bias)
//   ...     u64  running-stat float count
//   ...     per batch-norm layer in order: mean[c] then var[c], f32
//
// Round-trips are bit-exact.

#include "hybnet/binio.hpp"
#include "hybnet/nn/network.hpp"

namespace hybnet::nn {

using CheckpointError = io::FormatError;

inline constexpr std::uint8_t kNoModalityTag = 255;

inline std::string serialize_model(Network<float>& net, std::uint8_t modality_tag) {
    std::string out;
    io::put_bytes(out, "LNN1", 4);
    io::put_u32(out, 1);
    io::put_u8(out, modality_tag);
    io::put_u8(out, 0);
    io::put_u8(out, 0);
    io::put_u8(out, 0);
    const NetworkSpec& spec = net.spec();
    io::put_f32(out, static_cast<float>(spec.initial_lr));
    for (int d : spec.input_shape) io::put_u32(out, static_cast<std::uint32_t>(d));
    io::put_u32(out, static_cast<std::uint32_t>(spec.layers.size()));
    for (const auto& ls : spec.layers) {
        io::put_u8(out, static_cast<std::uint8_t>(ls.kind));
        io::put_u8(out, 0);
        io::put_u8(out, 0);
        io::put_u8(out, 0);
        std::int32_t a = 0, b = 0, c = 0;
        float d = 0.0f;
        switch (ls.kind) {
            case LayerKind::conv: a = ls.filters; b = ls.fh; c = ls.fw; break;
            case LayerKind::maxpool: a = ls.ph; b = ls.pw; break;
            case LayerKind::dense: a = ls.units; break;
            case LayerKind::dropout: d = static_cast<float>(ls.rate); break;
            default: break;
        }
        io::put_i32(out, a);
        io::put_i32(out, b);
        io::put_i32(out, c);
        io::put_f32(out, d);
    }
    auto blocks = net.param_blocks();
    std::uint64_t pcount = 0;
    for (auto* blk : blocks) pcount += blk->value.size();
    io::put_u64(out, pcount);
    for (auto* blk : blocks)
        for (float v : blk->value) io::put_f32(out, v);
    auto bns = net.batchnorm_layers();
    std::uint64_t scount = 0;
    for (auto* bn : bns) scount += bn->running_mean().size() + bn->running_var().size();
    io::put_u64(out, scount);
    for (auto* bn : bns) {
        for (float v : bn->running_mean()) io::put_f32(out, v);
        for (float v : bn->running_var()) io::put_f32(out, v);
    }
    return out;
}

inline void save_model(const std::string& path, Network<float>& net,
                       std::uint8_t modality_tag = kNoModalityTag) {
    io::write_file(path, serialize_model(net, modality_tag));
}

struct LoadedModel {
    Network<float> net;
    std::uint8_t modality_tag;
};

inline LoadedModel deserialize_model(const std::string& buf) {
    io::Reader r(buf, "model");
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, "LNN1", 4) != 0)
        throw CheckpointError("model: bad magic", 0);
    const std::uint32_t version = r.u32();
    if (version != 1) throw CheckpointError("model: unsupported version", 4);
    const std::uint8_t modality = r.u8();
    r.u8();
    r.u8();
    r.u8();
    NetworkSpec spec;
    spec.initial_lr = r.f32();
    for (int i = 0; i < 3; ++i)
        spec.input_shape[static_cast<std::size_t>(i)] = static_cast<int>(r.u32());
    const std::uint32_t nlayers = r.u32();
    for (std::uint32_t i = 0; i < nlayers; ++i) {
        const std::size_t at = r.offset();
        const std::uint8_t kind = r.u8();
        r.u8();
        r.u8();
        r.u8();
        const std::int32_t a = r.i32();
        const std::int32_t b = r.i32();
        const std::int32_t c = r.i32();
        const float d = r.f32();
        if (kind > static_cast<std::uint8_t>(LayerKind::softmax))
            throw CheckpointError("model: unknown layer kind", at);
        LayerSpec ls;
        ls.kind = static_cast<LayerKind>(kind);
        switch (ls.kind) {
            case LayerKind::conv: ls.filters = a; ls.fh = b; ls.fw = c; break;
            case LayerKind::maxpool: ls.ph = a; ls.pw = b; break;
            case LayerKind::dense: ls.units = a; break;
            case LayerKind::dropout: ls.rate = d; break;
            default: break;
        }
        spec.layers.push_back(ls);
    }
    Rng dummy(0);
    LoadedModel lm{Network<float>(spec, dummy), modality};
    auto blocks = lm.net.param_blocks();
    const std::uint64_t pcount = r.u64();
    std::uint64_t expect = 0;
    for (auto* blk : blocks) expect += blk->value.size();
    if (pcount != expect)
        throw CheckpointError("model: parameter count mismatch", r.offset() - 8);
    for (auto* blk : blocks)
        for (auto& v : blk->value) v = r.f32();
    const std::uint64_t scount = r.u64();
    auto bns = lm.net.batchnorm_layers();
    expect = 0;
    for (auto* bn : bns) expect += bn->running_mean().size() + bn->running_var().size();
    if (scount != expect)
        throw CheckpointError("model: running-stat count mismatch", r.offset() - 8);
    for (auto* bn : bns) {
        for (auto& v : bn->running_mean()) v = r.f32();
        for (auto& v : bn->running_var()) v = r.f32();
    }
    if (!r.at_end()) throw CheckpointError("model: trailing bytes", r.offset());
    return lm;
}

inline LoadedModel load_model(const std::string& path) {
    return deserialize_model(io::read_file(path));
}

}  // namespace hybnet::nn
