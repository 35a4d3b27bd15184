#pragma once

// Labeled training/validation corpus generation and the LDS1 binary
// container.
//
// Every record is synthesized independently from a seed derived as
// (master seed, stream tag, record index), so records are addressable,
// regenerable, and the train/validation streams are disjoint by
// construction. Per record the draw order is fixed: symbol value, interferer
// presence, interferer SF, interferer time offset, INR, SINR, interferer
// symbol content, noise samples.
//
// LDS1 layout (little-endian):
//   0   magic "LDS1"
//   4   u32 version (1)
//   8   u8  modality (0 iq, 1 stft, 2 fft)
//   9   u8  reserved, u16 reserved
//   12  u32 shape h, u32 shape w, u32 shape c
//   24  u64 record count
//   32  u32 label arity (number of classes)
//   36  u32 manifest length, then that many bytes of manifest text
//   then per record: f32 features[h*w*c], i32 label,
//                    f32 inr_db, f32 sinr_db, i32 interferer_sf, i32 offset
//
// Records without an interferer store interferer_sf = 0, offset = 0 and
// inr_db = kNoInterferer.

#include <charconv>
#include <functional>
#include <map>
#include <optional>

#include "hybnet/channel.hpp"
#include "hybnet/models.hpp"

namespace hybnet::dataset {

inline constexpr float kNoInterferer = -999.0f;

enum class DatasetKind : std::uint8_t { symbols = 0, interference = 1 };

inline const char* to_string(DatasetKind k) {
    return k == DatasetKind::symbols ? "symbols" : "interference";
}

struct DatasetSpec {
    DatasetKind kind = DatasetKind::symbols;
    models::Modality modality = models::Modality::fft;
    std::size_t num_train = 20000;  // paper-scale run: 110000
    std::size_t num_val = 5000;     // paper-scale run: 30000
    double sinr_db_min = -20.0;
    double sinr_db_max = 0.0;
    double inr_db_min = -10.0;
    double inr_db_max = 30.0;
    std::vector<int> interferer_sfs = {7, 8, 9, 10, 11, 12};
    double interference_fraction = 0.5;
    // Interference-labeled sets only: keep a frame only when its
    // signal-to-interference ratio satisfies |SIR| >= this bound, which
    // trains the supervisor on unambiguous examples and leaves the decision
    // boundary to interpolation. 0 disables the exclusion.
    double min_abs_sir_db = 0.0;
    // Interference-labeled sets only: floor on the INR of class-1 frames.
    // An interferer far below the noise floor is invisible regardless of its
    // power relative to the target; such frames carry no learnable class
    // evidence. Very negative = disabled.
    double class1_inr_floor_db = -1e9;
    // Width of the class-1 INR band above the floor. Concentrates class-1
    // mass near the switching boundary instead of spending most of it on
    // trivially loud interferers. Very large = disabled.
    double class1_inr_window_db = 1e9;
    std::uint64_t rng_seed = 1;

    void validate() const {
        if (num_train == 0 || num_val == 0)
            throw std::domain_error("DatasetSpec: counts must be positive");
        if (sinr_db_min > sinr_db_max || inr_db_min > inr_db_max)
            throw std::domain_error("DatasetSpec: empty dB range");
        if (interferer_sfs.empty())
            throw std::domain_error("DatasetSpec: no interferer spreading factors");
        for (int sf : interferer_sfs)
            if (sf < 7 || sf > 12)
                throw std::domain_error("DatasetSpec: interferer sf out of [7,12]");
        if (interference_fraction < 0.0 || interference_fraction > 1.0)
            throw std::domain_error("DatasetSpec: interference_fraction out of [0,1]");
        if (min_abs_sir_db < 0.0)
            throw std::domain_error("DatasetSpec: min_abs_sir_db must be >= 0");
    }

    int label_arity(const phy::LoraParams& p) const {
        return kind == DatasetKind::symbols ? p.alphabet_size : 2;
    }
};

struct RecordMeta {
    float inr_db = kNoInterferer;
    float sinr_db = 0.0f;
    std::int32_t interferer_sf = 0;  // 0 = no interferer
    std::int32_t offset = 0;
};

struct DatasetRecord {
    nn::TensorF features;
    std::int32_t label = 0;
    RecordMeta meta;
};

enum class Split : std::uint64_t { train = 0x54, val = 0x56 };

namespace detail {

inline Rng record_rng(std::uint64_t master_seed, Split split, std::size_t index) {
    return Rng(master_seed).split(static_cast<std::uint64_t>(split)).split(index);
}

struct Draw {
    bool has_interferer = false;
    channel::ChannelConfig cfg;
};

inline Draw draw_interferer_conditions(const DatasetSpec& spec, const phy::LoraParams& p,
                                       Rng& rng) {
    Draw d;
    d.has_interferer = true;
    d.cfg.interferer_sf =
        spec.interferer_sfs[rng.uniform_int(spec.interferer_sfs.size())];
    const int ni = channel::interferer_params(d.cfg, p).samples_per_symbol;
    d.cfg.interferer_offset_samples = static_cast<int>(rng.uniform_int(ni));
    d.cfg.inr_db = rng.uniform(spec.inr_db_min, spec.inr_db_max);
    d.cfg.sinr_db = rng.uniform(spec.sinr_db_min, spec.sinr_db_max);
    return d;
}

// target + noise with sigma^2 = 1/gamma (the no-interferer limit)
inline CVec noise_only_mixture(const CVec& target, double sinr_db, Rng& rng) {
    const double amp = std::sqrt(1.0 / db_to_linear(sinr_db));
    CVec out(target.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = target[i] + amp * rng.cgaussian();
    return out;
}

inline DatasetRecord finish_record(const CVec& mixture, int label, const RecordMeta& meta,
                                   const DatasetSpec& spec, const phy::LoraParams& p) {
    phy::IqSymbol sym;
    sym.samples = mixture;
    DatasetRecord rec;
    rec.features = spec.kind == DatasetKind::interference
                       ? models::interference_feature(sym, p)
                       : models::featurize(sym, spec.modality, p);
    rec.label = label;
    rec.meta = meta;
    return rec;
}

}  // namespace detail

// Symbol-labeled record: label is the modulated symbol value.
inline DatasetRecord make_symbol_record(const DatasetSpec& spec, const phy::LoraParams& p,
                                        Split split, std::size_t index) {
    Rng rng = detail::record_rng(spec.rng_seed, split, index);
    const int m = static_cast<int>(rng.uniform_int(p.alphabet_size));
    const bool has_intf = rng.uniform() < spec.interference_fraction;
    const CVec target = phy::modulate_symbol(m, p).samples;
    RecordMeta meta;
    CVec mixture;
    if (has_intf) {
        detail::Draw d = detail::draw_interferer_conditions(spec, p, rng);
        meta.inr_db = static_cast<float>(d.cfg.inr_db);
        meta.sinr_db = static_cast<float>(d.cfg.sinr_db);
        meta.interferer_sf = d.cfg.interferer_sf;
        meta.offset = d.cfg.interferer_offset_samples;
        mixture = channel::mix(target, d.cfg, p, rng);
    } else {
        const double sinr_db = rng.uniform(spec.sinr_db_min, spec.sinr_db_max);
        meta.sinr_db = static_cast<float>(sinr_db);
        mixture = detail::noise_only_mixture(target, sinr_db, rng);
    }
    return detail::finish_record(mixture, m, meta, spec, p);
}

namespace detail {

// pI/ps as a function of linear INR alpha at linear SINR gamma; increasing in
// alpha, so range feasibility reduces to checking the endpoints.
inline double pi_of(double alpha, double gamma) { return alpha / (gamma * (1.0 + alpha)); }

}  // namespace detail

// Binary-labeled record for the interference detector. Class 1 means the
// interferer is stronger than the target (pI > ps); class 0 covers weaker
// interferers and pure-noise frames. Labels alternate with the record index,
// which forces an exact 50/50 class balance; the pI = ps boundary is excluded
// because the rule is strict on both sides.
//
// The SINR is drawn first with the same marginal for both classes and only
// the INR is drawn conditionally. Total impairment power depends on the SINR
// alone, so this keeps frame loudness uninformative about the class and the
// detector has to key on interference structure. When the configured INR
// range cannot realize the class at the drawn SINR, class 0 falls back to a
// pure-noise frame (which it is, to within the exclusion band) and class 1
// redraws the SINR.
inline DatasetRecord make_interference_record(const DatasetSpec& spec,
                                              const phy::LoraParams& p, Split split,
                                              std::size_t index) {
    Rng rng = detail::record_rng(spec.rng_seed, split, index);
    const int target_label = static_cast<int>(index % 2);
    const int m = static_cast<int>(rng.uniform_int(p.alphabet_size));
    const CVec target = phy::modulate_symbol(m, p).samples;
    RecordMeta meta;
    CVec mixture;

    const double band = db_to_linear(spec.min_abs_sir_db);
    const double alpha_min = db_to_linear(spec.inr_db_min);
    const double alpha_max = db_to_linear(spec.inr_db_max);

    double sinr_db = rng.uniform(spec.sinr_db_min, spec.sinr_db_max);
    bool with_interferer = false;
    channel::ChannelConfig cfg;

    if (target_label == 0) {
        const bool want_interferer = rng.uniform() < spec.interference_fraction;
        const double gamma = db_to_linear(sinr_db);
        if (want_interferer && detail::pi_of(alpha_min, gamma) < 1.0 / band) {
            for (int tries = 0; tries < 1000 && !with_interferer; ++tries) {
                detail::Draw d = detail::draw_interferer_conditions(spec, p, rng);
                d.cfg.sinr_db = sinr_db;
                if (detail::pi_of(db_to_linear(d.cfg.inr_db), gamma) < 1.0 / band) {
                    cfg = d.cfg;
                    with_interferer = true;
                }
            }
        }
    } else {
        for (int outer = 0; outer < 100000 && !with_interferer; ++outer) {
            const double gamma = db_to_linear(sinr_db);
            if (detail::pi_of(alpha_max, gamma) > band &&
                spec.class1_inr_floor_db <= spec.inr_db_max) {
                for (int tries = 0; tries < 1000 && !with_interferer; ++tries) {
                    detail::Draw d = detail::draw_interferer_conditions(spec, p, rng);
                    d.cfg.sinr_db = sinr_db;
                    if (detail::pi_of(db_to_linear(d.cfg.inr_db), gamma) > band &&
                        d.cfg.inr_db >= spec.class1_inr_floor_db &&
                        d.cfg.inr_db <= spec.class1_inr_floor_db + spec.class1_inr_window_db) {
                        cfg = d.cfg;
                        with_interferer = true;
                    }
                }
            }
            if (!with_interferer)
                sinr_db = rng.uniform(spec.sinr_db_min, spec.sinr_db_max);
        }
        if (!with_interferer)
            throw std::runtime_error(
                "make_interference_record: configured INR/SINR ranges cannot produce "
                "an interferer with pI/ps above the exclusion band");
    }

    if (with_interferer) {
        meta.inr_db = static_cast<float>(cfg.inr_db);
        meta.sinr_db = static_cast<float>(cfg.sinr_db);
        meta.interferer_sf = cfg.interferer_sf;
        meta.offset = cfg.interferer_offset_samples;
        mixture = channel::mix(target, cfg, p, rng);
    } else {
        meta.sinr_db = static_cast<float>(sinr_db);
        mixture = detail::noise_only_mixture(target, sinr_db, rng);
    }
    return detail::finish_record(mixture, target_label, meta, spec, p);
}

inline DatasetRecord make_record(const DatasetSpec& spec, const phy::LoraParams& p,
                                 Split split, std::size_t index) {
    return spec.kind == DatasetKind::symbols
               ? make_symbol_record(spec, p, split, index)
               : make_interference_record(spec, p, split, index);
}

// Stream all records of one split through a sink, in index order.
inline void generate(const DatasetSpec& spec, const phy::LoraParams& p, Split split,
                     const std::function<void(DatasetRecord&&)>& sink) {
    spec.validate();
    const std::size_t count = split == Split::train ? spec.num_train : spec.num_val;
    for (std::size_t i = 0; i < count; ++i) sink(make_record(spec, p, split, i));
}

inline std::vector<DatasetRecord> generate_vector(const DatasetSpec& spec,
                                                  const phy::LoraParams& p, Split split) {
    std::vector<DatasetRecord> out;
    out.reserve(split == Split::train ? spec.num_train : spec.num_val);
    generate(spec, p, split, [&](DatasetRecord&& r) { out.push_back(std::move(r)); });
    return out;
}

// ---------------------------------------------------------------------------
// Plain-text manifest (key=value per line), used both as the generation input
// and as the sidecar provenance file next to each LDS1 container.

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string format_manifest(const DatasetSpec& spec, const phy::LoraParams& p) {
    std::string out;
    out += "kind=" + std::string(to_string(spec.kind)) + "\n";
    out += "modality=" + std::string(models::to_string(spec.modality)) + "\n";
    out += "sf=" + std::to_string(p.sf) + "\n";
    out += "bandwidth_hz=" + detail::fmt_double(p.bandwidth_hz) + "\n";
    out += "sample_rate_hz=" + detail::fmt_double(p.sample_rate_hz) + "\n";
    out += "num_train=" + std::to_string(spec.num_train) + "\n";
    out += "num_val=" + std::to_string(spec.num_val) + "\n";
    out += "sinr_db_min=" + detail::fmt_double(spec.sinr_db_min) + "\n";
    out += "sinr_db_max=" + detail::fmt_double(spec.sinr_db_max) + "\n";
    out += "inr_db_min=" + detail::fmt_double(spec.inr_db_min) + "\n";
    out += "inr_db_max=" + detail::fmt_double(spec.inr_db_max) + "\n";
    out += "interferer_sfs=";
    for (std::size_t i = 0; i < spec.interferer_sfs.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(spec.interferer_sfs[i]);
    }
    out += "\n";
    out += "interference_fraction=" + detail::fmt_double(spec.interference_fraction) + "\n";
    out += "min_abs_sir_db=" + detail::fmt_double(spec.min_abs_sir_db) + "\n";
    if (spec.class1_inr_floor_db > -1e8)
        out += "class1_inr_floor_db=" + detail::fmt_double(spec.class1_inr_floor_db) + "\n";
    if (spec.class1_inr_window_db < 1e8)
        out += "class1_inr_window_db=" + detail::fmt_double(spec.class1_inr_window_db) + "\n";
    out += "seed=" + std::to_string(spec.rng_seed) + "\n";
    return out;
}

struct ManifestConfig {
    DatasetSpec spec;
    phy::LoraParams params = phy::LoraParams::sf7_125k();
};

inline ManifestConfig parse_manifest(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("manifest: malformed line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    auto get_double = [&](const std::string& key, double dflt) {
        auto v = get(key);
        return v ? std::stod(*v) : dflt;
    };

    ManifestConfig cfg;
    if (auto v = get("kind")) {
        if (*v == "symbols") cfg.spec.kind = DatasetKind::symbols;
        else if (*v == "interference") cfg.spec.kind = DatasetKind::interference;
        else throw std::runtime_error("manifest: unknown kind: " + *v);
    }
    if (auto v = get("modality")) cfg.spec.modality = models::modality_from_string(*v);
    const int sf = static_cast<int>(get_double("sf", 7));
    const double bw = get_double("bandwidth_hz", 125e3);
    const double fs = get_double("sample_rate_hz", bw);
    cfg.params = phy::LoraParams::make(sf, bw, fs);
    cfg.spec.num_train = static_cast<std::size_t>(get_double("num_train", 20000));
    cfg.spec.num_val = static_cast<std::size_t>(get_double("num_val", 5000));
    cfg.spec.sinr_db_min = get_double("sinr_db_min", -20.0);
    cfg.spec.sinr_db_max = get_double("sinr_db_max", 0.0);
    cfg.spec.inr_db_min = get_double("inr_db_min", -10.0);
    cfg.spec.inr_db_max = get_double("inr_db_max", 30.0);
    cfg.spec.interference_fraction = get_double("interference_fraction", 0.5);
    cfg.spec.min_abs_sir_db = get_double("min_abs_sir_db", 0.0);
    cfg.spec.class1_inr_floor_db = get_double("class1_inr_floor_db", -1e9);
    cfg.spec.class1_inr_window_db = get_double("class1_inr_window_db", 1e9);
    cfg.spec.rng_seed = static_cast<std::uint64_t>(get_double("seed", 1));
    if (auto v = get("interferer_sfs")) {
        cfg.spec.interferer_sfs.clear();
        std::size_t p2 = 0;
        while (p2 < v->size()) {
            std::size_t comma = v->find(',', p2);
            if (comma == std::string::npos) comma = v->size();
            cfg.spec.interferer_sfs.push_back(std::stoi(v->substr(p2, comma - p2)));
            p2 = comma + 1;
        }
    }
    cfg.spec.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// LDS1 container

// What one record's feature blob holds. The first three values mirror the
// network input modalities; interference-detector corpora store the
// magnitude spectrum.
enum class FeatureTag : std::uint8_t {
    iq = 0,
    stft = 1,
    fft = 2,
    fft_magnitude = 3,
};

inline FeatureTag feature_tag_of(const DatasetSpec& spec) {
    if (spec.kind == DatasetKind::interference) return FeatureTag::fft_magnitude;
    return static_cast<FeatureTag>(spec.modality);
}

struct LdsHeader {
    FeatureTag feature = FeatureTag::fft;
    std::array<int, 3> shape{0, 0, 0};
    std::uint64_t count = 0;
    std::uint32_t label_arity = 0;
    std::string manifest;

    std::size_t feature_floats() const {
        return static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
    }
    std::size_t record_bytes() const { return feature_floats() * 4 + 20; }
    std::size_t header_bytes() const { return 40 + manifest.size(); }
    std::size_t file_bytes() const { return header_bytes() + count * record_bytes(); }
};

class LdsWriter {
public:
    LdsWriter(const std::string& path, const LdsHeader& header)
        : header_(header), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw io::FormatError("cannot open " + path + " for writing", 0);
        std::string buf;
        io::put_bytes(buf, "LDS1", 4);
        io::put_u32(buf, 1);
        io::put_u8(buf, static_cast<std::uint8_t>(header.feature));
        io::put_u8(buf, 0);
        io::put_u16(buf, 0);
        for (int d : header.shape) io::put_u32(buf, static_cast<std::uint32_t>(d));
        io::put_u64(buf, header.count);
        io::put_u32(buf, header.label_arity);
        io::put_u32(buf, static_cast<std::uint32_t>(header.manifest.size()));
        io::put_bytes(buf, header.manifest.data(), header.manifest.size());
        out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }

    void write(const DatasetRecord& rec) {
        if (rec.features.numel() != header_.feature_floats())
            throw std::domain_error("LdsWriter: record feature shape mismatch");
        if (written_ == header_.count)
            throw std::domain_error("LdsWriter: more records than declared");
        std::string buf;
        buf.reserve(header_.record_bytes());
        for (float v : rec.features.data) io::put_f32(buf, v);
        io::put_i32(buf, rec.label);
        io::put_f32(buf, rec.meta.inr_db);
        io::put_f32(buf, rec.meta.sinr_db);
        io::put_i32(buf, rec.meta.interferer_sf);
        io::put_i32(buf, rec.meta.offset);
        out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        ++written_;
    }

    void close() {
        if (written_ != header_.count)
            throw std::domain_error("LdsWriter: fewer records than declared");
        out_.flush();
        if (!out_) throw io::FormatError("LdsWriter: write failure", 0);
        out_.close();
    }

private:
    LdsHeader header_;
    std::ofstream out_;
    std::uint64_t written_ = 0;
};

inline void save(const std::string& path, const LdsHeader& header,
                 const std::vector<DatasetRecord>& records) {
    LdsHeader h = header;
    h.count = records.size();
    LdsWriter w(path, h);
    for (const auto& r : records) w.write(r);
    w.close();
}

inline LdsHeader parse_lds_header(io::Reader& r) {
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, "LDS1", 4) != 0) throw io::FormatError("dataset: bad magic", 0);
    const std::uint32_t version = r.u32();
    if (version != 1) throw io::FormatError("dataset: unsupported version", 4);
    LdsHeader h;
    const std::uint8_t feature = r.u8();
    if (feature > 3) throw io::FormatError("dataset: bad feature tag", 8);
    h.feature = static_cast<FeatureTag>(feature);
    r.u8();
    r.u16();
    for (int i = 0; i < 3; ++i)
        h.shape[static_cast<std::size_t>(i)] = static_cast<int>(r.u32());
    h.count = r.u64();
    h.label_arity = r.u32();
    const std::uint32_t mlen = r.u32();
    h.manifest.resize(mlen);
    if (mlen > 0) r.raw(h.manifest.data(), mlen);
    return h;
}

struct LdsFile {
    LdsHeader header;
    std::vector<DatasetRecord> records;
};

inline LdsFile load_from_bytes(const std::string& buf) {
    io::Reader r(buf, "dataset");
    LdsFile f;
    f.header = parse_lds_header(r);
    const std::size_t nf = f.header.feature_floats();
    f.records.resize(f.header.count);
    for (auto& rec : f.records) {
        rec.features = nn::TensorF(
            std::vector<int>{f.header.shape[0], f.header.shape[1], f.header.shape[2]});
        for (std::size_t i = 0; i < nf; ++i) rec.features.data[i] = r.f32();
        rec.label = r.i32();
        rec.meta.inr_db = r.f32();
        rec.meta.sinr_db = r.f32();
        rec.meta.interferer_sf = r.i32();
        rec.meta.offset = r.i32();
    }
    if (!r.at_end()) throw io::FormatError("dataset: trailing bytes", r.offset());
    return f;
}

inline LdsFile load(const std::string& path) { return load_from_bytes(io::read_file(path)); }

// Load straight into one [count, h, w, c] tensor plus labels and metadata,
// skipping the per-record intermediate.
struct LoadedTensors {
    LdsHeader header;
    nn::TensorF features;  // [count, h, w, c]
    std::vector<int> labels;
    std::vector<RecordMeta> meta;
};

inline LoadedTensors load_tensors(const std::string& path) {
    const std::string buf = io::read_file(path);
    io::Reader r(buf, "dataset");
    LoadedTensors out;
    out.header = parse_lds_header(r);
    if (out.header.count == 0) throw io::FormatError("dataset: empty container", 24);
    const std::size_t nf = out.header.feature_floats();
    out.features = nn::TensorF(std::vector<int>{static_cast<int>(out.header.count),
                                                out.header.shape[0], out.header.shape[1],
                                                out.header.shape[2]});
    out.labels.resize(out.header.count);
    out.meta.resize(out.header.count);
    for (std::uint64_t i = 0; i < out.header.count; ++i) {
        float* dst = out.features.ptr() + i * nf;
        for (std::size_t k = 0; k < nf; ++k) dst[k] = r.f32();
        out.labels[i] = r.i32();
        out.meta[i].inr_db = r.f32();
        out.meta[i].sinr_db = r.f32();
        out.meta[i].interferer_sf = r.i32();
        out.meta[i].offset = r.i32();
    }
    if (!r.at_end()) throw io::FormatError("dataset: trailing bytes", r.offset());
    return out;
}

// Generate one split and stream it straight to disk; returns the header.
inline LdsHeader generate_to_file(const std::string& path, const DatasetSpec& spec,
                                  const phy::LoraParams& p, Split split) {
    spec.validate();
    LdsHeader h;
    h.feature = feature_tag_of(spec);
    const auto shape = models::modality_shape(spec.modality, p);
    h.shape = {shape[0], shape[1], shape[2]};
    h.count = split == Split::train ? spec.num_train : spec.num_val;
    h.label_arity = static_cast<std::uint32_t>(spec.label_arity(p));
    h.manifest = format_manifest(spec, p);
    LdsWriter w(path, h);
    generate(spec, p, split, [&](DatasetRecord&& rec) { w.write(rec); });
    w.close();
    return h;
}

}  // namespace hybnet::dataset
