// Command-line front end: dataset generation, network training, Monte-Carlo
// BER sweeps, detection-time benchmarks, and the switching-envelope check.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 check failure.

#include <cstdio>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "hybnet/bench.hpp"

using namespace hybnet;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        if (comma > pos) out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int run_generate(const std::string& spec_path, const std::string& out_stem) {
    const dataset::ManifestConfig cfg =
        dataset::parse_manifest(io::read_file(spec_path));
    const std::string manifest = dataset::format_manifest(cfg.spec, cfg.params);
    std::printf("generating %s dataset (%s modality): %zu train / %zu val records\n",
                dataset::to_string(cfg.spec.kind), models::to_string(cfg.spec.modality),
                cfg.spec.num_train, cfg.spec.num_val);
    dataset::generate_to_file(out_stem + ".train.lds1", cfg.spec, cfg.params,
                              dataset::Split::train);
    dataset::generate_to_file(out_stem + ".val.lds1", cfg.spec, cfg.params,
                              dataset::Split::val);
    io::write_file(out_stem + ".manifest", manifest);
    std::printf("wrote %s.train.lds1, %s.val.lds1, %s.manifest\n", out_stem.c_str(),
                out_stem.c_str(), out_stem.c_str());
    return 0;
}

int run_train(const std::string& net_name, const std::string& data_stem,
              const std::string& out_path, int epochs, double lr, int batch,
              std::uint64_t seed) {
    nn::NetworkSpec spec;
    models::Modality modality;
    bool expect_binary = false;
    if (net_name == "iq") {
        spec = models::build_iq_cnn();
        modality = models::Modality::iq;
    } else if (net_name == "stft") {
        spec = models::build_stft_cnn();
        modality = models::Modality::stft;
    } else if (net_name == "fft") {
        spec = models::build_fft_cnn();
        modality = models::Modality::fft;
    } else if (net_name == "intdet") {
        spec = models::build_interference_detector();
        modality = models::Modality::fft;
        expect_binary = true;
    } else {
        throw UsageError("--net must be one of iq|stft|fft|intdet");
    }

    const dataset::LoadedTensors train = dataset::load_tensors(data_stem + ".train.lds1");
    const dataset::LoadedTensors val = dataset::load_tensors(data_stem + ".val.lds1");
    const dataset::FeatureTag want_feature =
        expect_binary ? dataset::FeatureTag::fft_magnitude
                      : static_cast<dataset::FeatureTag>(modality);
    if (train.header.feature != want_feature)
        throw io::FormatError("training data features do not match --net " + net_name, 8);
    if (expect_binary != (train.header.label_arity == 2))
        throw io::FormatError("training data label arity does not match --net " + net_name,
                              32);

    nn::TrainingConfig cfg;
    cfg.epochs = epochs;
    cfg.lr_initial = lr;  // 0 keeps the network's published rate
    cfg.minibatch = batch;
    cfg.rng_seed = seed;
    cfg.verbose = true;

    std::printf("training %s: %d records, %d epochs, lr %.4g, batch %d, seed %llu\n",
                net_name.c_str(), train.features.shape[0], cfg.epochs,
                cfg.lr_initial > 0 ? cfg.lr_initial : spec.initial_lr, cfg.minibatch,
                static_cast<unsigned long long>(seed));
    Rng init(seed);
    nn::Network<float> net(spec, init);
    nn::train(net, train.features, train.labels, cfg, &val.features, &val.labels);
    if (expect_binary)
        models::save_interference_detector(out_path, net);
    else
        nn::save_model(out_path, net, static_cast<std::uint8_t>(modality));
    std::printf("saved model to %s\n", out_path.c_str());
    return 0;
}

int run_evaluate(const std::string& detectors_csv, double sinr_db, double inr_from,
                 double inr_to, double inr_step, int interferer_sf, long trials,
                 std::uint64_t seed, const std::string& out_csv,
                 const std::string& model_iq, const std::string& model_stft,
                 const std::string& model_fft, const std::string& model_intdet) {
    std::vector<bench::DetectorKind> kinds;
    for (const auto& name : split_csv(detectors_csv))
        kinds.push_back(bench::detector_from_string(name));
    if (kinds.empty()) throw UsageError("--detectors list is empty");

    std::unique_ptr<models::TrainedModel> iq, stft, fft, intdet;
    auto load_if = [](const std::string& path) -> std::unique_ptr<models::TrainedModel> {
        if (path.empty()) return nullptr;
        return std::make_unique<models::TrainedModel>(models::load_trained(path));
    };
    iq = load_if(model_iq);
    stft = load_if(model_stft);
    fft = load_if(model_fft);
    if (!model_intdet.empty())
        intdet = std::make_unique<models::TrainedModel>(
            models::load_interference_detector(model_intdet));

    bench::DetectorBank bank;
    bank.iq_cnn = iq.get();
    bank.stft_cnn = stft.get();
    bank.fft_cnn = fft.get();
    bank.interference_detector = intdet.get();

    bench::SweepConfig cfg;
    cfg.inr_grid_db = bench::SweepConfig::grid(inr_from, inr_to, inr_step);
    cfg.sinr_db = sinr_db;
    cfg.interferer_sf = interferer_sf;
    cfg.trials_per_point = trials;
    cfg.seed = seed;

    const phy::LoraParams params = phy::LoraParams::sf7_125k();
    std::printf("sweeping %zu INR points at SINR %.3g dB, %ld trials/point\n",
                cfg.inr_grid_db.size(), sinr_db, trials);
    const auto points = bench::ber_sweep(kinds, bank, cfg, params);
    bench::write_ber_csv(out_csv, points);
    std::printf("wrote %zu rows to %s\n", points.size(), out_csv.c_str());
    return 0;
}

int run_bench(const std::string& models_csv, const std::string& symbols_csv, int repeats,
              std::uint64_t seed, const std::string& out_csv) {
    std::vector<bench::DetectorKind> kinds;
    for (const auto& name : split_csv(models_csv)) {
        if (name == "iq") kinds.push_back(bench::DetectorKind::iq_cnn);
        else if (name == "stft") kinds.push_back(bench::DetectorKind::stft_cnn);
        else if (name == "fft") kinds.push_back(bench::DetectorKind::fft_cnn);
        else kinds.push_back(bench::detector_from_string(name));
    }
    std::vector<int> counts;
    for (const auto& s : split_csv(symbols_csv)) counts.push_back(std::stoi(s));
    if (kinds.empty() || counts.empty())
        throw UsageError("--models and --symbols must be non-empty");

    // timing is weight-independent, so fresh random-init networks suffice
    Rng init(seed);
    models::TrainedModel iq(nn::Network<float>(models::build_iq_cnn(), init),
                            models::Modality::iq);
    models::TrainedModel stft(nn::Network<float>(models::build_stft_cnn(), init),
                              models::Modality::stft);
    models::TrainedModel fft(nn::Network<float>(models::build_fft_cnn(), init),
                             models::Modality::fft);
    bench::DetectorBank bank;
    bank.iq_cnn = &iq;
    bank.stft_cnn = &stft;
    bank.fft_cnn = &fft;

    const phy::LoraParams params = phy::LoraParams::sf7_125k();
    const auto result = bench::timing_bench(kinds, bank, counts, repeats, seed, params);
    io::write_file(out_csv, bench::format_timing_csv(result));
    for (const auto& fit : result.fits)
        std::printf("%-9s slope %.6g s/symbol  intercept %.3g s  R^2 %.6f\n",
                    bench::to_string(fit.network), fit.slope_s_per_symbol, fit.intercept_s,
                    fit.r2);
    std::printf("wrote %zu timing rows to %s\n", result.points.size(), out_csv.c_str());
    return 0;
}

int run_envelope_check(const std::string& in_csv, double margin,
                       double min_pass_fraction) {
    const auto rows = bench::read_ber_csv(in_csv);
    const auto report = bench::hybnet_envelope_check(rows, margin);
    for (const auto& pt : report.points)
        std::printf("inr %+7.2f dB  hybnet %.6g  best-branch %.6g  limit %.6g  %s\n",
                    pt.inr_db, pt.hybnet_ber, pt.best_branch_ber, pt.limit,
                    pt.pass ? "pass" : "FAIL");
    std::printf("pass fraction %.3f (required %.3f at margin %.3g)\n",
                report.pass_fraction, min_pass_fraction, margin);
    return report.pass_fraction >= min_pass_fraction ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LoRa symbol-detection laboratory"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Build train/val datasets from a manifest");
    std::string gen_spec, gen_out;
    gen->add_option("--spec", gen_spec, "manifest file (key=value lines)")->required();
    gen->add_option("--out", gen_out, "output stem; writes <out>.train.lds1 etc.")
        ->required();

    // train
    auto* tr = app.add_subcommand("train", "Train a detector network");
    std::string tr_net, tr_data, tr_out;
    int tr_epochs = 60, tr_batch = 256;
    double tr_lr = 0.0;
    std::uint64_t tr_seed = 1;
    tr->add_option("--net", tr_net, "iq|stft|fft|intdet")->required();
    tr->add_option("--data", tr_data, "dataset stem from 'generate'")->required();
    tr->add_option("--out", tr_out, "model output path")->required();
    tr->add_option("--epochs", tr_epochs, "training epochs (default 60)");
    tr->add_option("--lr", tr_lr, "initial learning rate (default: network's own)");
    tr->add_option("--batch", tr_batch, "minibatch size (default 256)");
    tr->add_option("--seed", tr_seed, "rng seed");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Monte-Carlo BER sweep over INR");
    std::string ev_dets = "coherent,noncoherent";
    double ev_sinr = -15.0, ev_from = -10.0, ev_to = 30.0, ev_step = 2.5;
    int ev_sf = 7;
    long ev_trials = 20000;
    std::uint64_t ev_seed = 1;
    std::string ev_out, ev_miq, ev_mstft, ev_mfft, ev_mintdet;
    ev->add_option("--detectors", ev_dets, "comma list of detectors");
    ev->add_option("--sinr-db", ev_sinr, "fixed SINR in dB (default -15)");
    ev->add_option("--inr-from", ev_from, "INR grid start, dB");
    ev->add_option("--inr-to", ev_to, "INR grid end, dB");
    ev->add_option("--inr-step", ev_step, "INR grid step, dB");
    ev->add_option("--interferer-sf", ev_sf, "interferer spreading factor (7..12)");
    ev->add_option("--trials", ev_trials, "trials per grid point");
    ev->add_option("--seed", ev_seed, "master seed");
    ev->add_option("--out", ev_out, "output CSV path")->required();
    ev->add_option("--model-iq", ev_miq, "iq_cnn model file");
    ev->add_option("--model-stft", ev_mstft, "stft_cnn model file");
    ev->add_option("--model-fft", ev_mfft, "fft_cnn model file");
    ev->add_option("--model-intdet", ev_mintdet, "interference-detector model file");

    // bench
    auto* be = app.add_subcommand("bench", "Detection-time benchmark");
    std::string be_models = "iq,stft,fft", be_symbols = "1,10,100,1000", be_out;
    int be_repeats = 5;
    std::uint64_t be_seed = 1;
    be->add_option("--models", be_models, "comma list: iq,stft,fft");
    be->add_option("--symbols", be_symbols, "comma list of symbol counts");
    be->add_option("--repeats", be_repeats, "repeats per point (median is kept)");
    be->add_option("--seed", be_seed, "rng seed");
    be->add_option("--out", be_out, "output CSV path")->required();

    // envelope-check
    auto* envc = app.add_subcommand("envelope-check",
                                    "Verify hybnet tracks the better branch");
    std::string envc_in;
    double envc_margin = 0.25, envc_minpass = 0.9;
    envc->add_option("--in", envc_in, "evaluate CSV")->required();
    envc->add_option("--margin", envc_margin, "relative margin (default 0.25)");
    envc->add_option("--min-pass-fraction", envc_minpass,
                     "required fraction of passing points (default 0.9)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) return run_generate(gen_spec, gen_out);
        if (tr->parsed())
            return run_train(tr_net, tr_data, tr_out, tr_epochs, tr_lr, tr_batch, tr_seed);
        if (ev->parsed())
            return run_evaluate(ev_dets, ev_sinr, ev_from, ev_to, ev_step, ev_sf,
                                ev_trials, ev_seed, ev_out, ev_miq, ev_mstft, ev_mfft,
                                ev_mintdet);
        if (be->parsed()) return run_bench(be_models, be_symbols, be_repeats, be_seed, be_out);
        if (envc->parsed()) return run_envelope_check(envc_in, envc_margin, envc_minpass);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const io::FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
