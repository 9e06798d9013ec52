#ifndef SUPERFEED_HARNESS_HPP
#define SUPERFEED_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "superfeed/chanrecip.hpp"
#include "superfeed/onebitcs.hpp"
#include "superfeed/phylink.hpp"
#include "superfeed/pipeline.hpp"
#include "superfeed/tinynn.hpp"

namespace superfeed {

inline constexpr const char* kArtifactVersion = "superfeed-1.0.0";
inline constexpr const char* kSnrDefinition = "snr_db=10log10(E/sigma2)";

enum class Scheme { proposed, ref_y1, ref_r1_tdm };

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::proposed: return "proposed";
        case Scheme::ref_y1: return "ref_y1";
        case Scheme::ref_r1_tdm: return "ref_r1_tdm_approx";
    }
    return "?";
}

inline Scheme scheme_from_name(const std::string& name) {
    if (name == "proposed") return Scheme::proposed;
    if (name == "ref_y1") return Scheme::ref_y1;
    if (name == "ref_r1_tdm" || name == "ref_r1_tdm_approx") return Scheme::ref_r1_tdm;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

struct ExperimentConfig {
    int n_antennas = 64;
    int sparsity = 8;
    int p_len = 512;
    std::vector<double> c = {2.0};
    std::vector<double> rho = {0.10};
    std::vector<double> snr_db = {10.0};
    int alpha = 5;
    int beta = 100;
    Scheme scheme = Scheme::proposed;
    int n_trials = 2000;
    std::uint64_t seed = 1;
    int n_records = 10000;
    double energy = 1.0;
    double tau = 1.0;
    std::string dataset;
    std::string ampl_model;
    std::string ampf_model;
    // channel generator
    int n_paths = 8;
    double angle_spread = std::numbers::pi;
    double decay_db_per_path = 6.0;
    double gain_correlation = 0.9;
    double ul_dl_frequency_ratio = 1.0;
    // training
    double learning_rate = 1e-3;
    int batch_size = 128;
    int epochs = 100;
    int patience = 10;
    std::string optimizer = "adam";
    double lrelu_slope = 0.01;

    int m_of(double c_val) const { return static_cast<int>(std::lround(c_val * n_antennas)); }
    int t_of(double c_val) const {
        const int k = n_antennas + 2 * m_of(c_val);
        return (k + 1) / 2;
    }

    ChannelGenConfig channel_config() const {
        ChannelGenConfig cc;
        cc.n_antennas = n_antennas;
        cc.sparsity = sparsity;
        cc.n_paths = n_paths;
        cc.angle_spread = angle_spread;
        cc.per_path_power_decay_db = decay_db_per_path;
        cc.gain_correlation = gain_correlation;
        cc.ul_dl_frequency_ratio = ul_dl_frequency_ratio;
        cc.seed = seed;
        return cc;
    }

    TrainConfig train_config() const {
        TrainConfig tc;
        tc.learning_rate = learning_rate;
        tc.batch_size = batch_size;
        tc.epochs = epochs;
        tc.early_stop_patience = patience;
        tc.seed = seed;
        if (optimizer == "adam") tc.optimizer = Optimizer::adam;
        else if (optimizer == "sgd") tc.optimizer = Optimizer::sgd;
        else throw std::invalid_argument("optimizer must be 'adam' or 'sgd'");
        return tc;
    }

    void validate() const {
        if (n_antennas < 2 || (n_antennas & (n_antennas - 1)) != 0)
            throw std::invalid_argument("config: N must be a power of two");
        if (sparsity < 1 || sparsity > n_antennas)
            throw std::invalid_argument("config: S out of range");
        if (p_len < 1 || (p_len & (p_len - 1)) != 0)
            throw std::invalid_argument("config: P must be a power of two");
        if (alpha < 0 || beta < 0) throw std::invalid_argument("config: negative iteration count");
        if (n_trials < 1) throw std::invalid_argument("config: n_trials must be >= 1");
        if (c.empty() || rho.empty() || snr_db.empty())
            throw std::invalid_argument("config: empty sweep grid");
        for (double cv : c) {
            if (cv <= 0.0) throw std::invalid_argument("config: c must be positive");
            if (t_of(cv) > p_len)
                throw std::invalid_argument("config: T = ceil((N+2M)/2) exceeds P for c=" +
                                            std::to_string(cv));
        }
        for (double r : rho)
            if (r < 0.0 || r > 1.0) throw std::invalid_argument("config: rho must be in [0,1]");
        channel_config().validate();
        train_config().validate();
    }
};

namespace detail {

inline std::vector<double> json_number_list(const nlohmann::json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& x : v) out.push_back(x.get<double>());
    } else {
        out.push_back(v.get<double>());
    }
    if (out.empty()) throw std::invalid_argument("config: empty list for '" + key + "'");
    return out;
}

}  // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["n_antennas"] = cfg.n_antennas;
    j["sparsity"] = cfg.sparsity;
    j["p_len"] = cfg.p_len;
    j["c"] = cfg.c;
    j["rho"] = cfg.rho;
    j["snr_db"] = cfg.snr_db;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["scheme"] = scheme_name(cfg.scheme) == "ref_r1_tdm_approx" ? "ref_r1_tdm"
                                                                 : scheme_name(cfg.scheme);
    j["n_trials"] = cfg.n_trials;
    j["seed"] = cfg.seed;
    j["n_records"] = cfg.n_records;
    j["energy"] = cfg.energy;
    j["tau"] = cfg.tau;
    j["dataset"] = cfg.dataset;
    j["ampl_model"] = cfg.ampl_model;
    j["ampf_model"] = cfg.ampf_model;
    j["n_paths"] = cfg.n_paths;
    j["angle_spread"] = cfg.angle_spread;
    j["decay_db_per_path"] = cfg.decay_db_per_path;
    j["gain_correlation"] = cfg.gain_correlation;
    j["ul_dl_frequency_ratio"] = cfg.ul_dl_frequency_ratio;
    j["learning_rate"] = cfg.learning_rate;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["patience"] = cfg.patience;
    j["optimizer"] = cfg.optimizer;
    j["lrelu_slope"] = cfg.lrelu_slope;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "n_antennas") cfg.n_antennas = value.get<int>();
        else if (key == "sparsity") cfg.sparsity = value.get<int>();
        else if (key == "p_len") cfg.p_len = value.get<int>();
        else if (key == "c") cfg.c = detail::json_number_list(value, key);
        else if (key == "rho") cfg.rho = detail::json_number_list(value, key);
        else if (key == "snr_db") cfg.snr_db = detail::json_number_list(value, key);
        else if (key == "alpha") cfg.alpha = value.get<int>();
        else if (key == "beta") cfg.beta = value.get<int>();
        else if (key == "scheme") cfg.scheme = scheme_from_name(value.get<std::string>());
        else if (key == "n_trials") cfg.n_trials = value.get<int>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "n_records") cfg.n_records = value.get<int>();
        else if (key == "energy") cfg.energy = value.get<double>();
        else if (key == "tau") cfg.tau = value.get<double>();
        else if (key == "dataset") cfg.dataset = value.get<std::string>();
        else if (key == "ampl_model") cfg.ampl_model = value.get<std::string>();
        else if (key == "ampf_model") cfg.ampf_model = value.get<std::string>();
        else if (key == "n_paths") cfg.n_paths = value.get<int>();
        else if (key == "angle_spread") cfg.angle_spread = value.get<double>();
        else if (key == "decay_db_per_path") cfg.decay_db_per_path = value.get<double>();
        else if (key == "gain_correlation") cfg.gain_correlation = value.get<double>();
        else if (key == "ul_dl_frequency_ratio") cfg.ul_dl_frequency_ratio = value.get<double>();
        else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
        else if (key == "batch_size") cfg.batch_size = value.get<int>();
        else if (key == "epochs") cfg.epochs = value.get<int>();
        else if (key == "patience") cfg.patience = value.get<int>();
        else if (key == "optimizer") cfg.optimizer = value.get<std::string>();
        else if (key == "lrelu_slope") cfg.lrelu_slope = value.get<double>();
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

// FNV-1a over the canonical (sorted-key) config dump.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Total reconstruction complexity reported per scheme; the proposed figure
// adds the networks' weight and FLOP totals to the iteration cost.
inline long long scheme_complexity(Scheme scheme, int n, int m, int alpha, int beta) {
    switch (scheme) {
        case Scheme::proposed: return 4LL * m * n * alpha + 30LL * n * n;
        case Scheme::ref_y1: return 4LL * m * n * beta;
        case Scheme::ref_r1_tdm: return 4LL * (m + 1) * n * beta;
    }
    return 0;
}

struct SweepRow {
    std::string scheme;
    double snr_db = 0.0, rho = 0.0, c = 0.0;
    int alpha_or_beta = 0;
    double mean_nmse = 0.0, std_err = 0.0, ber_fv = 0.0, ber_ulus = 0.0;
    double mean_recon_ns = 0.0;
    long long flops = 0;
    std::uint64_t config_hash = 0;
};

struct TrialOutcome {
    double nmse = 0.0;
    double ber_fv = 0.0;
    double ber_ulus = 0.0;
};

// One end-to-end frame: encode, superimpose, cross the uplink, detect, and
// reconstruct with the selected scheme.
inline TrialOutcome run_trial(const ExperimentConfig& cfg, Scheme scheme, double snr_db,
                              double rho, const MeasurementMatrix& phi,
                              const SpreadingMatrix& q, const MlpModel* ampl,
                              const MlpModel* ampf, std::uint64_t point_id, int trial) {
    const int n = cfg.n_antennas;
    const int m = phi.m;

    auto chan_rng = make_stream(cfg.seed, 0xC4A1ULL, point_id, trial);
    const ChannelPair pair = generate_pair(cfg.channel_config(), chan_rng);

    const FeedbackVector fv = quantize(pair.downlink_angular, phi, pair.support);
    const std::vector<std::uint8_t> w = fv_to_bits(fv);
    const cvec r = qpsk_modulate(w);
    if (r.size() != q.t_len) throw std::logic_error("run_trial: T mismatch");

    TxConfig tx_cfg;
    tx_cfg.rho = rho;
    tx_cfg.energy = cfg.energy;
    tx_cfg.p_len = cfg.p_len;
    tx_cfg.mode = (scheme == Scheme::ref_r1_tdm) ? TxMode::tdm : TxMode::superimposed;

    auto data_rng = make_stream(cfg.seed, 0xD47AULL, point_id, trial);
    cvec ulus;
    std::vector<std::uint8_t> ulus_bits_tx;
    if (tx_cfg.mode == TxMode::superimposed) {
        ulus_bits_tx.resize(2 * cfg.p_len);
        for (auto& b : ulus_bits_tx) b = static_cast<std::uint8_t>(data_rng() & 1);
        ulus = qpsk_modulate(ulus_bits_tx);
    }

    const cvec x = transmit(r, ulus, q, tx_cfg);
    const double sigma2 = cfg.energy * std::pow(10.0, -snr_db / 10.0);
    auto noise_rng = make_stream(cfg.seed, 0x401EULL, point_id, trial);
    const Eigen::MatrixXcd rx = channel_apply(x, pair.uplink_spatial, sigma2, noise_rng);
    const ReceiveResult det = receive(rx, pair.uplink_spatial, q, tx_cfg, fv.k_total());

    TrialOutcome out;
    int fv_errors = 0;
    for (std::size_t i = 0; i < w.size(); ++i) fv_errors += (w[i] != det.fv_bits[i]);
    out.ber_fv = static_cast<double>(fv_errors) / w.size();
    if (tx_cfg.mode == TxMode::superimposed) {
        int data_errors = 0;
        for (std::size_t i = 0; i < ulus_bits_tx.size(); ++i)
            data_errors += (ulus_bits_tx[i] != det.ulus_bits[i]);
        out.ber_ulus = static_cast<double>(data_errors) / ulus_bits_tx.size();
    }

    const FeedbackVector fv_det = fv_from_bits(det.fv_bits, n, m);
    cvec estimate;
    try {
        switch (scheme) {
            case Scheme::proposed: {
                estimate = recover(fv_det, pair.uplink_angular, phi, cfg.alpha, ampl, ampf,
                                   RecoveryMode::full_fusion, cfg.tau)
                               .full;
                break;
            }
            case Scheme::ref_y1: {
                const ReconstructionResult rec = sca_biht(fv_det, phi, cfg.beta, cfg.tau);
                estimate = recombine(rec.amplitude, rec.angle);
                break;
            }
            case Scheme::ref_r1_tdm: {
                const ReconstructionResult rec =
                    biht_top_s(fv_det, phi, cfg.sparsity, cfg.beta, cfg.tau);
                estimate = recombine(rec.amplitude, rec.angle);
                break;
            }
        }
    } catch (const std::runtime_error&) {
        // empty detected support or degenerate iterate: score the zero estimate
        estimate = cvec::Zero(n);
    }
    out.nmse = nmse(pair.downlink_angular, estimate);
    return out;
}

// Trials fan out over threads into a preallocated per-trial array; the
// reduction is sequential, so results do not depend on the thread count.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int n_threads = 1) {
    cfg.validate();
    std::optional<MlpModel> ampl, ampf;
    if (cfg.scheme == Scheme::proposed) {
        if (cfg.ampl_model.empty() || cfg.ampf_model.empty())
            throw std::invalid_argument("sweep: scheme 'proposed' needs ampl_model and ampf_model");
        ampl = load_model(cfg.ampl_model);
        ampf = load_model(cfg.ampf_model);
    }
    const std::uint64_t hash = config_hash(cfg);

    std::vector<SweepRow> rows;
    std::uint64_t point_id = 0;
    for (double c_val : cfg.c) {
        const int m = cfg.m_of(c_val);
        const MeasurementMatrix phi = MeasurementMatrix::make(cfg.n_antennas, m, cfg.seed);
        const SpreadingMatrix q = build_spreading(cfg.p_len, cfg.t_of(c_val), cfg.seed);
        for (double rho : cfg.rho) {
            for (double snr : cfg.snr_db) {
                ++point_id;
                std::vector<TrialOutcome> outcomes(cfg.n_trials);
                auto worker = [&](int begin, int end) {
                    for (int t = begin; t < end; ++t)
                        outcomes[t] = run_trial(cfg, cfg.scheme, snr, rho, phi, q,
                                                ampl ? &*ampl : nullptr, ampf ? &*ampf : nullptr,
                                                point_id, t);
                };
                if (n_threads <= 1) {
                    worker(0, cfg.n_trials);
                } else {
                    std::vector<std::thread> pool;
                    const int chunk = (cfg.n_trials + n_threads - 1) / n_threads;
                    for (int w = 0; w < n_threads; ++w) {
                        const int begin = w * chunk;
                        const int end = std::min(cfg.n_trials, begin + chunk);
                        if (begin < end) pool.emplace_back(worker, begin, end);
                    }
                    for (auto& th : pool) th.join();
                }

                SweepRow row;
                row.scheme = scheme_name(cfg.scheme);
                row.snr_db = snr;
                row.rho = rho;
                row.c = c_val;
                row.alpha_or_beta = (cfg.scheme == Scheme::proposed) ? cfg.alpha : cfg.beta;
                double sum = 0.0, sum_sq = 0.0;
                for (const auto& o : outcomes) {
                    sum += o.nmse;
                    sum_sq += o.nmse * o.nmse;
                    row.ber_fv += o.ber_fv;
                    row.ber_ulus += o.ber_ulus;
                }
                const double nt = static_cast<double>(cfg.n_trials);
                row.mean_nmse = sum / nt;
                const double var = std::max(0.0, sum_sq / nt - row.mean_nmse * row.mean_nmse);
                row.std_err = cfg.n_trials > 1 ? std::sqrt(var / (nt - 1.0)) : 0.0;
                row.ber_fv /= nt;
                row.ber_ulus /= nt;
                row.mean_recon_ns = 0.0;  // timing lives in the bench command
                row.flops = scheme_complexity(cfg.scheme, cfg.n_antennas, m, cfg.alpha, cfg.beta);
                row.config_hash = hash;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

// Single-threaded recovery timing over pre-detected feedback vectors.
inline std::vector<SweepRow> run_bench(const ExperimentConfig& cfg,
                                       const std::vector<Scheme>& schemes) {
    cfg.validate();
    std::optional<MlpModel> ampl, ampf;
    const bool needs_models =
        std::find(schemes.begin(), schemes.end(), Scheme::proposed) != schemes.end();
    if (needs_models) {
        ampl = load_model(cfg.ampl_model);
        ampf = load_model(cfg.ampf_model);
    }
    const std::uint64_t hash = config_hash(cfg);

    std::vector<SweepRow> rows;
    for (double c_val : cfg.c) {
        const int m = cfg.m_of(c_val);
        const MeasurementMatrix phi = MeasurementMatrix::make(cfg.n_antennas, m, cfg.seed);

        // a pool of distinct noiseless feedback vectors, cycled over the trials
        const int n_distinct = std::min(cfg.n_trials, 128);
        std::vector<FeedbackVector> fvs;
        std::vector<ChannelPair> pairs;
        auto rng = make_stream(cfg.seed, 0xBE4CULL);
        for (int i = 0; i < n_distinct; ++i) {
            pairs.push_back(generate_pair(cfg.channel_config(), rng));
            fvs.push_back(quantize(pairs.back().downlink_angular, phi, pairs.back().support));
        }

        for (Scheme scheme : schemes) {
            double nmse_sum = 0.0;
            const auto t0 = std::chrono::steady_clock::now();
            for (int t = 0; t < cfg.n_trials; ++t) {
                const int i = t % n_distinct;
                cvec estimate;
                switch (scheme) {
                    case Scheme::proposed:
                        estimate = recover(fvs[i], pairs[i].uplink_angular, phi, cfg.alpha,
                                           &*ampl, &*ampf, RecoveryMode::full_fusion, cfg.tau)
                                       .full;
                        break;
                    case Scheme::ref_y1: {
                        const auto rec = sca_biht(fvs[i], phi, cfg.beta, cfg.tau);
                        estimate = recombine(rec.amplitude, rec.angle);
                        break;
                    }
                    case Scheme::ref_r1_tdm: {
                        const auto rec = biht_top_s(fvs[i], phi, cfg.sparsity, cfg.beta, cfg.tau);
                        estimate = recombine(rec.amplitude, rec.angle);
                        break;
                    }
                }
                nmse_sum += nmse(pairs[i].downlink_angular, estimate);
            }
            const auto t1 = std::chrono::steady_clock::now();
            const double total_ns =
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();

            SweepRow row;
            row.scheme = scheme_name(scheme);
            row.snr_db = 0.0;  // noiseless bench
            row.rho = cfg.rho.front();
            row.c = c_val;
            row.alpha_or_beta = (scheme == Scheme::proposed) ? cfg.alpha : cfg.beta;
            row.mean_nmse = nmse_sum / cfg.n_trials;
            row.mean_recon_ns = total_ns / cfg.n_trials;
            row.flops = scheme_complexity(scheme, cfg.n_antennas, m, cfg.alpha, cfg.beta);
            row.config_hash = hash;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::string rows_to_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "scheme,snr_db,rho,c,alpha_or_beta,mean_nmse,std_err,ber_fv,ber_ulus,"
        "mean_recon_ns,flops,config_hash\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%.6g,%.6g,%.6g,%d,%.10e,%.10e,%.10e,%.10e,%.10e,%lld,%016llx\n",
                      r.scheme.c_str(), r.snr_db, r.rho, r.c, r.alpha_or_beta, r.mean_nmse,
                      r.std_err, r.ber_fv, r.ber_ulus, r.mean_recon_ns, r.flops,
                      static_cast<unsigned long long>(r.config_hash));
        out += buf;
    }
    return out;
}

inline void write_results(const std::vector<SweepRow>& rows, const ExperimentConfig& cfg,
                          const std::string& path) {
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << rows_to_csv(rows);
    }
    nlohmann::json meta;
    meta["config"] = config_to_json(cfg);
    meta["config_hash"] = config_hash(cfg);
    meta["artifact_version"] = kArtifactVersion;
    meta["snr_definition"] = kSnrDefinition;
    meta["nmse_definition"] = "mean(|h - h_est|^2 / |h|^2), h unit-normalized at generation";
    std::ofstream meta_out(path + ".meta.json", std::ios::trunc);
    meta_out << meta.dump(2) << "\n";
}

// Shared by the train subcommand and the acceptance suite: trains one of the
// two amplitude networks from a dataset file.
struct TrainReport {
    LossHistory history;
    double test_mse = 0.0;
};

inline TrainReport train_ampl(const ExperimentConfig& cfg, const std::vector<ChannelPair>& pairs,
                              MlpModel& model) {
    const MeasurementMatrix phi =
        MeasurementMatrix::make(cfg.n_antennas, cfg.m_of(cfg.c.front()), cfg.seed);
    const Corpora corpora = build_training_corpora(pairs, phi, cfg.alpha, nullptr, cfg.seed, cfg.tau);
    model = make_model(cfg.n_antennas, 2 * cfg.n_antennas, cfg.n_antennas, cfg.lrelu_slope,
                       cfg.seed);
    fit_standardization(model, corpora.ampl.train_x);
    TrainReport report;
    report.history = train(model, corpora.ampl.train_x, corpora.ampl.train_y, corpora.ampl.val_x,
                           corpora.ampl.val_y, cfg.train_config());
    report.test_mse = mse_loss(model, corpora.ampl.test_x, corpora.ampl.test_y);
    return report;
}

inline TrainReport train_ampf(const ExperimentConfig& cfg, const std::vector<ChannelPair>& pairs,
                              const MlpModel& ampl, MlpModel& model) {
    const MeasurementMatrix phi =
        MeasurementMatrix::make(cfg.n_antennas, cfg.m_of(cfg.c.front()), cfg.seed);
    // noise-free training setting: sigma^2 = 0, but the initial amplitudes
    // still cross the superimposed link so they match deployment statistics
    const SpreadingMatrix q = build_spreading(cfg.p_len, cfg.t_of(cfg.c.front()), cfg.seed);
    CorpusLink link;
    link.spreading = &q;
    link.rho = cfg.rho.front();
    link.energy = cfg.energy;
    link.p_len = cfg.p_len;
    link.seed = cfg.seed;
    const Corpora corpora =
        build_training_corpora(pairs, phi, cfg.alpha, &ampl, cfg.seed, cfg.tau, &link);
    model = make_model(2 * cfg.n_antennas, 2 * cfg.n_antennas, cfg.n_antennas, cfg.lrelu_slope,
                       cfg.seed + 1);
    fit_standardization(model, corpora.ampf.train_x);
    TrainReport report;
    report.history = train(model, corpora.ampf.train_x, corpora.ampf.train_y, corpora.ampf.val_x,
                           corpora.ampf.val_y, cfg.train_config());
    report.test_mse = mse_loss(model, corpora.ampf.test_x, corpora.ampf.test_y);
    return report;
}

}  // namespace superfeed

#endif
