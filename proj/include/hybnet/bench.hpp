#pragma once

// Monte-Carlo BER sweeps over INR at fixed SINR, detection-time measurement,
// and the per-layer theoretical cost estimator.
//
// Sweeps are paired: every grid point draws one mixture stream (seeded by
// splitting the master seed with the point index) and runs every requested
// detector on the same realizations, which makes cross-detector comparisons
// low-variance and the output CSV byte-reproducible for a given seed.

#include <algorithm>
#include <charconv>
#include <chrono>

#include "hybnet/dataset.hpp"

namespace hybnet::bench {

enum class DetectorKind : std::uint8_t {
    coherent = 0,
    noncoherent = 1,
    iq_cnn = 2,
    stft_cnn = 3,
    fft_cnn = 4,
    hybnet = 5,
};

inline const char* to_string(DetectorKind k) {
    switch (k) {
        case DetectorKind::coherent: return "coherent";
        case DetectorKind::noncoherent: return "noncoherent";
        case DetectorKind::iq_cnn: return "iq_cnn";
        case DetectorKind::stft_cnn: return "stft_cnn";
        case DetectorKind::fft_cnn: return "fft_cnn";
        case DetectorKind::hybnet: return "hybnet";
    }
    return "?";
}

inline DetectorKind detector_from_string(const std::string& s) {
    for (int i = 0; i <= 5; ++i) {
        const auto k = static_cast<DetectorKind>(i);
        if (s == to_string(k)) return k;
    }
    throw std::domain_error("unknown detector: " + s);
}

// Trained models available to a sweep. Classical detectors need none of them.
struct DetectorBank {
    models::TrainedModel* iq_cnn = nullptr;
    models::TrainedModel* stft_cnn = nullptr;
    models::TrainedModel* fft_cnn = nullptr;
    models::TrainedModel* interference_detector = nullptr;

    void require(DetectorKind k) const {
        auto need = [&](const models::TrainedModel* m, const char* name) {
            if (m == nullptr)
                throw std::domain_error(std::string("detector '") + to_string(k) +
                                        "' needs a trained " + name + " model");
        };
        switch (k) {
            case DetectorKind::iq_cnn: need(iq_cnn, "iq_cnn"); break;
            case DetectorKind::stft_cnn: need(stft_cnn, "stft_cnn"); break;
            case DetectorKind::fft_cnn: need(fft_cnn, "fft_cnn"); break;
            case DetectorKind::hybnet:
                need(fft_cnn, "fft_cnn");
                need(interference_detector, "interference_detector");
                break;
            default: break;
        }
    }

    int detect(DetectorKind k, const phy::IqSymbol& r, const phy::LoraParams& p) const {
        switch (k) {
            case DetectorKind::coherent: return classic::detect_coherent(r, p).symbol;
            case DetectorKind::noncoherent: return classic::detect_noncoherent(r, p).symbol;
            case DetectorKind::iq_cnn:
                return models::detect_dl(*iq_cnn, r, models::Modality::iq, p).symbol;
            case DetectorKind::stft_cnn:
                return models::detect_dl(*stft_cnn, r, models::Modality::stft, p).symbol;
            case DetectorKind::fft_cnn:
                return models::detect_dl(*fft_cnn, r, models::Modality::fft, p).symbol;
            case DetectorKind::hybnet: {
                models::HybnetModel h{interference_detector, fft_cnn};
                return models::hybnet_detect(h, r, p).symbol;
            }
        }
        throw std::domain_error("detect: bad detector kind");
    }
};

struct BerPoint {
    DetectorKind detector = DetectorKind::coherent;
    double inr_db = 0.0;
    double sinr_db = 0.0;
    int interferer_sf = 0;
    long trials = 0;
    long symbol_errors = 0;
    double ber = 0.0;
    double ber_sigma = 0.0;
};

inline void finalize_point(BerPoint& pt, int alphabet_size) {
    const double ser = static_cast<double>(pt.symbol_errors) / pt.trials;
    pt.ber = classic::ber_from_ser(ser, alphabet_size);
    pt.ber_sigma = classic::ber_from_ser(
        std::sqrt(ser * (1.0 - ser) / static_cast<double>(pt.trials)), alphabet_size);
}

struct SweepConfig {
    std::vector<double> inr_grid_db;
    double sinr_db = -15.0;
    int interferer_sf = 7;
    long trials_per_point = 20000;
    std::uint64_t seed = 1;

    static std::vector<double> grid(double from_db, double to_db, double step_db) {
        std::vector<double> g;
        for (double v = from_db; v <= to_db + 1e-9; v += step_db) g.push_back(v);
        return g;
    }
};

// Per grid point and trial: uniform target symbol, random interferer content
// and offset, fresh noise; every detector sees the same mixture. Results are
// ordered grid-point-major, detector-minor.
inline std::vector<BerPoint> ber_sweep(const std::vector<DetectorKind>& detectors,
                                       const DetectorBank& bank, const SweepConfig& cfg,
                                       const phy::LoraParams& p) {
    if (cfg.trials_per_point < 1000)
        throw std::domain_error("ber_sweep: need at least 1000 trials per point");
    for (DetectorKind k : detectors) bank.require(k);

    const Rng master(cfg.seed);
    std::vector<BerPoint> out;
    for (std::size_t gi = 0; gi < cfg.inr_grid_db.size(); ++gi) {
        Rng rng = master.split(gi);
        std::vector<long> errors(detectors.size(), 0);
        channel::ChannelConfig ch;
        ch.inr_db = cfg.inr_grid_db[gi];
        ch.sinr_db = cfg.sinr_db;
        ch.interferer_sf = cfg.interferer_sf;
        const int ni = channel::interferer_params(ch, p).samples_per_symbol;
        for (long t = 0; t < cfg.trials_per_point; ++t) {
            const int m = static_cast<int>(rng.uniform_int(p.alphabet_size));
            ch.interferer_offset_samples = static_cast<int>(rng.uniform_int(ni));
            phy::IqSymbol r;
            r.samples = channel::mix(phy::modulate_symbol(m, p).samples, ch, p, rng);
            for (std::size_t d = 0; d < detectors.size(); ++d)
                if (bank.detect(detectors[d], r, p) != m) ++errors[d];
        }
        for (std::size_t d = 0; d < detectors.size(); ++d) {
            BerPoint pt;
            pt.detector = detectors[d];
            pt.inr_db = cfg.inr_grid_db[gi];
            pt.sinr_db = cfg.sinr_db;
            pt.interferer_sf = cfg.interferer_sf;
            pt.trials = cfg.trials_per_point;
            pt.symbol_errors = errors[d];
            finalize_point(pt, p.alphabet_size);
            out.push_back(pt);
        }
    }
    return out;
}

// Interferer-free sweep over symbol SNR Es/N0 (noise sigma^2 = N / (Es/N0)).
// Returns SER per point; used against the closed-form MFSK reference.
struct SerPoint {
    DetectorKind detector = DetectorKind::noncoherent;
    double es_n0_db = 0.0;
    long trials = 0;
    long symbol_errors = 0;
    double ser = 0.0;
};

inline std::vector<SerPoint> awgn_ser_sweep(const std::vector<DetectorKind>& detectors,
                                            const std::vector<double>& es_n0_grid_db,
                                            long trials_per_point, std::uint64_t seed,
                                            const phy::LoraParams& p) {
    const Rng master(seed);
    std::vector<SerPoint> out;
    for (std::size_t gi = 0; gi < es_n0_grid_db.size(); ++gi) {
        Rng rng = master.split(gi);
        const double es_n0 = db_to_linear(es_n0_grid_db[gi]);
        const double sigma = std::sqrt(static_cast<double>(p.samples_per_symbol) / es_n0);
        std::vector<long> errors(detectors.size(), 0);
        DetectorBank none;
        for (long t = 0; t < trials_per_point; ++t) {
            const int m = static_cast<int>(rng.uniform_int(p.alphabet_size));
            phy::IqSymbol r = phy::modulate_symbol(m, p);
            for (auto& v : r.samples) v += sigma * rng.cgaussian();
            for (std::size_t d = 0; d < detectors.size(); ++d)
                if (none.detect(detectors[d], r, p) != m) ++errors[d];
        }
        for (std::size_t d = 0; d < detectors.size(); ++d) {
            SerPoint pt;
            pt.detector = detectors[d];
            pt.es_n0_db = es_n0_grid_db[gi];
            pt.trials = trials_per_point;
            pt.symbol_errors = errors[d];
            pt.ser = static_cast<double>(errors[d]) / trials_per_point;
            out.push_back(pt);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Switching-envelope check: at every grid point the switching detector should
// track the better branch, BER(hybnet) <= (1+margin)*min(coherent, fft_cnn)
// plus three binomial sigma of the hybnet estimate.

struct EnvelopePoint {
    double inr_db = 0.0;
    double hybnet_ber = 0.0;
    double best_branch_ber = 0.0;
    double limit = 0.0;
    bool pass = false;
};

struct EnvelopeReport {
    std::vector<EnvelopePoint> points;
    double pass_fraction = 0.0;
};

inline EnvelopeReport hybnet_envelope_check(const std::vector<BerPoint>& results,
                                            double margin) {
    std::map<double, std::map<DetectorKind, const BerPoint*>> by_point;
    for (const auto& pt : results) by_point[pt.inr_db][pt.detector] = &pt;
    EnvelopeReport rep;
    for (const auto& [inr, dets] : by_point) {
        const auto coh = dets.find(DetectorKind::coherent);
        const auto fft = dets.find(DetectorKind::fft_cnn);
        const auto hyb = dets.find(DetectorKind::hybnet);
        if (coh == dets.end() || fft == dets.end() || hyb == dets.end())
            throw std::domain_error(
                "hybnet_envelope_check: need coherent, fft_cnn and hybnet at every grid "
                "point");
        if (coh->second->trials != hyb->second->trials ||
            fft->second->trials != hyb->second->trials)
            throw std::domain_error("hybnet_envelope_check: unpaired trial counts");
        EnvelopePoint ep;
        ep.inr_db = inr;
        ep.hybnet_ber = hyb->second->ber;
        ep.best_branch_ber = std::min(coh->second->ber, fft->second->ber);
        ep.limit = (1.0 + margin) * ep.best_branch_ber + 3.0 * hyb->second->ber_sigma;
        ep.pass = ep.hybnet_ber <= ep.limit;
        rep.points.push_back(ep);
    }
    if (rep.points.empty())
        throw std::domain_error("hybnet_envelope_check: no grid points");
    std::size_t passed = 0;
    for (const auto& ep : rep.points) passed += ep.pass ? 1 : 0;
    rep.pass_fraction = static_cast<double>(passed) / rep.points.size();
    return rep;
}

// ---------------------------------------------------------------------------
// Theoretical per-layer cost: num_symbols * sum over conv layers of
// input_channels * filter_elements * filter_count * output_spatial_elements.
// Pooling, dropout and dense layers are excluded (negligible next to the
// convolutions).

inline long long theoretical_cost(const nn::NetworkSpec& spec, long long num_symbols) {
    std::array<int, 3> cur = spec.input_shape;
    long long per_symbol = 0;
    const auto shapes = spec.infer_shapes();
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& ls = spec.layers[i];
        if (ls.kind == nn::LayerKind::conv) {
            const long long in_c = cur[2];
            const long long filter_elems = static_cast<long long>(ls.fh) * ls.fw;
            const long long out_spatial = static_cast<long long>(shapes[i][0]) * shapes[i][1];
            per_symbol += in_c * filter_elems * ls.filters * out_spatial;
        }
        cur = shapes[i];
    }
    return per_symbol * num_symbols;
}

// ---------------------------------------------------------------------------
// Wall-clock detection time vs. number of symbols, with a least-squares
// linear fit per network. Inputs are pregenerated outside the timed region;
// the timed work is featurize + forward per symbol, single-threaded.

struct TimingPoint {
    DetectorKind network = DetectorKind::fft_cnn;
    int num_symbols = 0;
    double wall_time_s = 0.0;  // median over repeats
};

struct TimingFit {
    DetectorKind network = DetectorKind::fft_cnn;
    double slope_s_per_symbol = 0.0;
    double intercept_s = 0.0;
    double r2 = 0.0;
};

struct TimingResult {
    std::vector<TimingPoint> points;
    std::vector<TimingFit> fits;
};

inline TimingFit linear_fit(DetectorKind k, const std::vector<TimingPoint>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (const auto& p : pts) {
        if (p.network != k) continue;
        sx += p.num_symbols;
        sy += p.wall_time_s;
        sxx += static_cast<double>(p.num_symbols) * p.num_symbols;
        sxy += p.num_symbols * p.wall_time_s;
        n += 1;
    }
    TimingFit fit;
    fit.network = k;
    const double denom = n * sxx - sx * sx;
    fit.slope_s_per_symbol = (n * sxy - sx * sy) / denom;
    fit.intercept_s = (sy - fit.slope_s_per_symbol * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (const auto& p : pts) {
        if (p.network != k) continue;
        const double pred = fit.intercept_s + fit.slope_s_per_symbol * p.num_symbols;
        ss_res += (p.wall_time_s - pred) * (p.wall_time_s - pred);
        ss_tot += (p.wall_time_s - mean_y) * (p.wall_time_s - mean_y);
    }
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

inline TimingResult timing_bench(const std::vector<DetectorKind>& networks,
                                 const DetectorBank& bank,
                                 const std::vector<int>& symbol_counts, int repeats,
                                 std::uint64_t seed, const phy::LoraParams& p) {
    if (repeats < 1) throw std::domain_error("timing_bench: repeats must be >= 1");
    for (DetectorKind k : networks) {
        if (k != DetectorKind::iq_cnn && k != DetectorKind::stft_cnn &&
            k != DetectorKind::fft_cnn)
            throw std::domain_error("timing_bench: only the three CNN detectors are timed");
        bank.require(k);
    }
    const int max_count = *std::max_element(symbol_counts.begin(), symbol_counts.end());

    // pregenerate noisy symbols outside the timed region
    Rng rng(seed);
    std::vector<phy::IqSymbol> inputs;
    inputs.reserve(static_cast<std::size_t>(max_count));
    for (int i = 0; i < max_count; ++i) {
        const int m = static_cast<int>(rng.uniform_int(p.alphabet_size));
        phy::IqSymbol r = phy::modulate_symbol(m, p);
        for (auto& v : r.samples) v += 0.5 * rng.cgaussian();
        inputs.push_back(std::move(r));
    }

    volatile long sink = 0;  // keep the detection work observable
    TimingResult result;
    for (DetectorKind k : networks) {
        for (int count : symbol_counts) {
            std::vector<double> times;
            times.reserve(static_cast<std::size_t>(repeats));
            for (int rep = 0; rep < repeats; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                long acc = 0;
                for (int i = 0; i < count; ++i) acc += bank.detect(k, inputs[i], p);
                const auto t1 = std::chrono::steady_clock::now();
                sink = sink + acc;
                times.push_back(std::chrono::duration<double>(t1 - t0).count());
            }
            std::sort(times.begin(), times.end());
            TimingPoint pt;
            pt.network = k;
            pt.num_symbols = count;
            pt.wall_time_s = times[times.size() / 2];
            result.points.push_back(pt);
        }
        result.fits.push_back(linear_fit(k, result.points));
    }
    (void)sink;
    return result;
}

// ---------------------------------------------------------------------------
// CSV serialization. Plain ASCII with '.' decimal separator; numbers are
// written with std::to_chars so reruns are byte-identical.

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

inline constexpr const char* kBerCsvHeader =
    "detector,inr_db,sinr_db,interferer_sf,trials,symbol_errors,ber,ber_sigma";

inline std::string format_ber_csv(const std::vector<BerPoint>& points) {
    std::string out = kBerCsvHeader;
    out += "\n";
    for (const auto& p : points) {
        out += to_string(p.detector);
        out += ",";
        out += detail::fmt(p.inr_db);
        out += ",";
        out += detail::fmt(p.sinr_db);
        out += ",";
        out += std::to_string(p.interferer_sf);
        out += ",";
        out += std::to_string(p.trials);
        out += ",";
        out += std::to_string(p.symbol_errors);
        out += ",";
        out += detail::fmt(p.ber);
        out += ",";
        out += detail::fmt(p.ber_sigma);
        out += "\n";
    }
    return out;
}

inline void write_ber_csv(const std::string& path, const std::vector<BerPoint>& points) {
    io::write_file(path, format_ber_csv(points));
}

inline std::vector<BerPoint> parse_ber_csv(const std::string& text) {
    std::vector<BerPoint> out;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        if (first) {
            if (line != kBerCsvHeader)
                throw io::FormatError("ber csv: unexpected header", 0);
            first = false;
            continue;
        }
        std::vector<std::string> cols;
        std::size_t p2 = 0;
        while (p2 <= line.size()) {
            std::size_t comma = line.find(',', p2);
            if (comma == std::string::npos) comma = line.size();
            cols.push_back(line.substr(p2, comma - p2));
            p2 = comma + 1;
        }
        if (cols.size() != 8) throw io::FormatError("ber csv: bad column count", pos);
        BerPoint pt;
        pt.detector = detector_from_string(cols[0]);
        pt.inr_db = std::stod(cols[1]);
        pt.sinr_db = std::stod(cols[2]);
        pt.interferer_sf = std::stoi(cols[3]);
        pt.trials = std::stol(cols[4]);
        pt.symbol_errors = std::stol(cols[5]);
        pt.ber = std::stod(cols[6]);
        pt.ber_sigma = std::stod(cols[7]);
        out.push_back(pt);
    }
    if (first) throw io::FormatError("ber csv: empty file", 0);
    return out;
}

inline std::vector<BerPoint> read_ber_csv(const std::string& path) {
    return parse_ber_csv(io::read_file(path));
}

inline constexpr const char* kTimingCsvHeader = "network,num_symbols,wall_time_s";

inline std::string format_timing_csv(const TimingResult& r) {
    std::string out = kTimingCsvHeader;
    out += "\n";
    for (const auto& p : r.points) {
        out += to_string(p.network);
        out += ",";
        out += std::to_string(p.num_symbols);
        out += ",";
        out += detail::fmt(p.wall_time_s);
        out += "\n";
    }
    return out;
}

}  // namespace hybnet::bench
