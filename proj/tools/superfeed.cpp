// superfeed: 1-bit CS superimposed CSI feedback simulator.
// Subcommands: gen (channel dataset), train (amplitude networks),
// sweep (NMSE/BER grids), bench (recovery timing).

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "superfeed/harness.hpp"

using namespace superfeed;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::vector<double> snr_db, rho, c;
    int alpha = -1, beta = -1, trials = -1;
    std::string scheme;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", o.out_path, "output path")->required();
    cmd->add_option("--snr-db", o.snr_db, "SNR grid override (dB)")->delimiter(',');
    cmd->add_option("--rho", o.rho, "power proportion override")->delimiter(',');
    cmd->add_option("--c", o.c, "compression rate override")->delimiter(',');
    cmd->add_option("--alpha", o.alpha, "simplified reconstruction iterations");
    cmd->add_option("--beta", o.beta, "baseline reconstruction iterations");
    cmd->add_option("--scheme", o.scheme, "proposed | ref_y1 | ref_r1_tdm");
    cmd->add_option("--trials", o.trials, "trials per grid point");
    cmd->add_option("--seed", o.seed, "master seed override")->each([&](const std::string&) {
        o.seed_set = true;
    });
    cmd->add_option("--threads", o.threads, "worker threads (sweep only)");
}

ExperimentConfig resolve(const CommonOpts& o) {
    ExperimentConfig cfg = load_config(o.config_path);
    if (!o.snr_db.empty()) cfg.snr_db = o.snr_db;
    if (!o.rho.empty()) cfg.rho = o.rho;
    if (!o.c.empty()) cfg.c = o.c;
    if (o.alpha >= 0) cfg.alpha = o.alpha;
    if (o.beta >= 0) cfg.beta = o.beta;
    if (o.trials >= 0) cfg.n_trials = o.trials;
    if (!o.scheme.empty()) cfg.scheme = scheme_from_name(o.scheme);
    if (o.seed_set) cfg.seed = o.seed;
    cfg.validate();
    return cfg;
}

int cmd_gen(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve(o);
    auto rng = make_stream(cfg.seed, 0xDA7AULL);
    std::vector<ChannelPair> pairs;
    pairs.reserve(cfg.n_records);
    for (int i = 0; i < cfg.n_records; ++i)
        pairs.push_back(generate_pair(cfg.channel_config(), rng));
    const std::size_t count = dataset_write(pairs, o.out_path);
    std::printf("wrote %zu channel pairs to %s (seed %llu)\n", count, o.out_path.c_str(),
                static_cast<unsigned long long>(cfg.seed));
    return 0;
}

int cmd_train(const CommonOpts& o, const std::string& which) {
    const ExperimentConfig cfg = resolve(o);
    if (cfg.dataset.empty()) throw std::runtime_error("train: config must set 'dataset'");
    const auto pairs = dataset_read(cfg.dataset, cfg.n_antennas);

    MlpModel model;
    TrainReport report;
    if (which == "ampl") {
        report = train_ampl(cfg, pairs, model);
    } else {
        if (cfg.ampl_model.empty())
            throw std::runtime_error("train ampf: config must set 'ampl_model' (train ampl first)");
        std::ifstream probe(cfg.ampl_model);
        if (!probe)
            throw std::runtime_error("train ampf: missing prerequisite model " + cfg.ampl_model);
        const MlpModel ampl = load_model(cfg.ampl_model);
        report = train_ampf(cfg, pairs, ampl, model);
    }
    save_model(model, o.out_path);

    nlohmann::json loss;
    loss["which"] = which;
    loss["train_loss"] = report.history.train;
    loss["val_loss"] = report.history.val;
    loss["best_epoch"] = report.history.best_epoch;
    loss["test_mse"] = report.test_mse;
    loss["config_hash"] = config_hash(cfg);
    std::ofstream loss_out(o.out_path + ".loss.json", std::ios::trunc);
    loss_out << loss.dump(2) << "\n";
    std::printf("%s: %zu epochs, best epoch %d, test MSE %.6e -> %s\n", which.c_str(),
                report.history.train.size(), report.history.best_epoch, report.test_mse,
                o.out_path.c_str());
    return 0;
}

int cmd_sweep(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve(o);
    const auto rows = run_sweep(cfg, o.threads);
    write_results(rows, cfg, o.out_path);
    std::printf("%s", rows_to_csv(rows).c_str());
    return 0;
}

int cmd_bench(const CommonOpts& o) {
    ExperimentConfig cfg = resolve(o);
    std::vector<Scheme> schemes = {Scheme::proposed, Scheme::ref_y1, Scheme::ref_r1_tdm};
    if (!o.scheme.empty()) schemes = {cfg.scheme};
    const auto rows = run_bench(cfg, schemes);
    write_results(rows, cfg, o.out_path);
    std::printf("%s", rows_to_csv(rows).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1-bit CS superimposed CSI feedback simulator"};
    app.require_subcommand(1);

    CommonOpts gen_o, train_o, sweep_o, bench_o;
    auto* gen = app.add_subcommand("gen", "generate a channel-pair dataset (.cpd)");
    add_common(gen, gen_o);
    auto* train = app.add_subcommand("train", "train an amplitude network");
    std::string which;
    train->add_option("which", which, "ampl | ampf")->required()->check(CLI::IsMember({"ampl", "ampf"}));
    add_common(train, train_o);
    auto* sweep = app.add_subcommand("sweep", "run a Monte-Carlo NMSE/BER sweep");
    add_common(sweep, sweep_o);
    auto* bench = app.add_subcommand("bench", "time recoveries on one thread");
    add_common(bench, bench_o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_o);
        if (train->parsed()) return cmd_train(train_o, which);
        if (sweep->parsed()) return cmd_sweep(sweep_o);
        if (bench->parsed()) return cmd_bench(bench_o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
