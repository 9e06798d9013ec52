#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "superfeed/pipeline.hpp"

using namespace superfeed;

namespace {

std::vector<ChannelPair> make_pairs(int count, int n, int s, int paths, std::uint64_t seed,
                                    double rho_g = 0.9) {
    ChannelGenConfig cfg;
    cfg.n_antennas = n;
    cfg.sparsity = s;
    cfg.n_paths = paths;
    cfg.gain_correlation = rho_g;
    auto rng = make_stream(seed);
    std::vector<ChannelPair> pairs;
    pairs.reserve(count);
    for (int i = 0; i < count; ++i) pairs.push_back(generate_pair(cfg, rng));
    return pairs;
}

double set_mse(const rmat& pred, const rmat& target) {
    return (pred - target).array().square().rowwise().sum().mean();
}

}  // namespace

TEST_CASE("nmse knowns") {
    cvec t(2), e(2);
    t << 1.0, 0.0;
    e << 1.0, 0.0;
    REQUIRE(nmse(t, e) == 0.0);
    e << 0.0, 1.0;
    REQUIRE(nmse(t, e) == Catch::Approx(2.0));
    REQUIRE_THROWS_AS(nmse(cvec::Zero(2), e), std::invalid_argument);
    REQUIRE_THROWS_AS(nmse(t, cvec::Zero(3)), std::invalid_argument);
}

TEST_CASE("recombination formula") {
    rvec amp(2), ang(2);
    amp << 2.0, 1.0;
    ang << 0.0, std::numbers::pi / 2.0;
    const cvec full = recombine(amp, ang);
    REQUIRE(full[0].real() == Catch::Approx(2.0));
    REQUIRE(std::abs(full[0].imag()) < 1e-15);
    REQUIRE(full[1].imag() == Catch::Approx(1.0));
    REQUIRE(std::abs(full[1].real()) < 1e-15);
}

TEST_CASE("zero-weight models produce clamped zero output") {
    MlpModel ampl = make_model(8, 16, 8, 0.01, 1);
    ampl.w1.setZero();
    ampl.w2.setZero();
    ampl.b1.setZero();
    ampl.b2.setZero();
    const rvec aux = ampl_infer(cvec::Ones(8), ampl);
    REQUIRE(aux.norm() == 0.0);

    MlpModel ampf = make_model(16, 16, 8, 0.01, 1);
    ampf.w1.setZero();
    ampf.w2.setZero();
    ampf.b1.setZero();
    ampf.b2.setZero();
    REQUIRE(fuse_amplitudes(rvec::Ones(8), rvec::Ones(8), ampf).norm() == 0.0);

    REQUIRE_THROWS_AS(ampl_infer(cvec::Ones(4), ampl), std::invalid_argument);
    REQUIRE_THROWS_AS(fuse_amplitudes(rvec::Ones(4), rvec::Ones(4), ampf), std::invalid_argument);
}

TEST_CASE("recover in recon-only mode bypasses the networks") {
    const auto pairs = make_pairs(1, 16, 4, 4, 3);
    const MeasurementMatrix phi = MeasurementMatrix::make(16, 32, 3);
    const FeedbackVector fv = quantize(pairs[0].downlink_angular, phi, pairs[0].support);
    const RecoveredCsi rec =
        recover(fv, pairs[0].uplink_angular, phi, 5, nullptr, nullptr, RecoveryMode::recon_only);
    REQUIRE_FALSE(rec.fusion_ran);
    const ReconstructionResult direct = sca_biht(fv, phi, 5);
    REQUIRE((rec.amplitude - direct.amplitude).norm() == 0.0);
    REQUIRE((rec.full - recombine(direct.amplitude, direct.angle)).norm() == 0.0);
    // recombination identity
    for (int i = 0; i < 16; ++i)
        REQUIRE(std::abs(rec.full[i] - std::polar(rec.amplitude[i], rec.angle[i])) < 1e-12);

    REQUIRE_THROWS_AS(
        recover(fv, pairs[0].uplink_angular, phi, 5, nullptr, nullptr, RecoveryMode::full_fusion),
        std::invalid_argument);
}

TEST_CASE("corpus split ratios and determinism") {
    const auto pairs = make_pairs(100, 16, 4, 4, 9);
    const MeasurementMatrix phi = MeasurementMatrix::make(16, 32, 9);
    const Corpora c = build_training_corpora(pairs, phi, 5, nullptr, 42);
    REQUIRE(c.ampl.train_x.rows() == 70);
    REQUIRE(c.ampl.val_x.rows() == 15);
    REQUIRE(c.ampl.test_x.rows() == 15);
    REQUIRE(c.ampl.train_x.cols() == 16);
    REQUIRE_FALSE(c.has_ampf);

    MlpModel ampl = make_model(16, 32, 16, 0.01, 1);
    const Corpora c2 = build_training_corpora(pairs, phi, 5, &ampl, 42);
    REQUIRE(c2.has_ampf);
    REQUIRE(c2.ampf.train_x.cols() == 32);  // 2N
    // concatenation order [initial | auxiliary]
    const auto records = build_corpus_records({pairs[0]}, phi, 5, &ampl);
    const Corpora c3 = build_training_corpora(pairs, phi, 5, &ampl, 42);
    REQUIRE(c3.ampf.train_x == c2.ampf.train_x);  // deterministic
    REQUIRE((records[0].initial - sca_biht(quantize(pairs[0].downlink_angular, phi,
                                                    pairs[0].support),
                                           phi, 5)
                                      .amplitude)
                .norm() == 0.0);

    REQUIRE_THROWS_WITH(build_training_corpora(make_pairs(5, 16, 4, 4, 1), phi, 5, nullptr, 1),
                        Catch::Matchers::ContainsSubstring("too small"));
}

TEST_CASE("trained AMPL beats the raw uplink amplitude baseline") {
    const int n = 16;
    const auto pairs = make_pairs(1200, n, 4, 6, 21);
    const MeasurementMatrix phi = MeasurementMatrix::make(n, 2 * n, 21);
    const Corpora c = build_training_corpora(pairs, phi, 5, nullptr, 7);

    MlpModel ampl = make_model(n, 2 * n, n, 0.01, 7);
    fit_standardization(ampl, c.ampl.train_x);
    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 64;
    cfg.learning_rate = 3e-3;
    cfg.early_stop_patience = 40;
    cfg.seed = 7;
    train(ampl, c.ampl.train_x, c.ampl.train_y, c.ampl.val_x, c.ampl.val_y, cfg);

    const rmat pred = forward_batch(ampl, c.ampl.test_x).cwiseMax(0.0);
    const double net_mse = set_mse(pred, c.ampl.test_y);

    // baseline: renormalized |g_angular| as a direct amplitude guess
    rmat base = c.ampl.test_x;
    for (int i = 0; i < base.rows(); ++i) base.row(i) /= base.row(i).norm();
    const double base_mse = set_mse(base, c.ampl.test_y);
    INFO("net " << net_mse << " baseline " << base_mse);
    REQUIRE(net_mse < base_mse);
}

TEST_CASE("trained AMPF fuses at least as well as either input") {
    const int n = 16;
    const auto pairs = make_pairs(1500, n, 4, 6, 31);
    const MeasurementMatrix phi = MeasurementMatrix::make(n, 2 * n, 31);

    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 64;
    cfg.learning_rate = 3e-3;
    cfg.early_stop_patience = 40;
    cfg.seed = 11;

    const Corpora ampl_corpus = build_training_corpora(pairs, phi, 5, nullptr, 11);
    MlpModel ampl = make_model(n, 2 * n, n, 0.01, 11);
    fit_standardization(ampl, ampl_corpus.ampl.train_x);
    train(ampl, ampl_corpus.ampl.train_x, ampl_corpus.ampl.train_y, ampl_corpus.ampl.val_x,
          ampl_corpus.ampl.val_y, cfg);

    const Corpora c = build_training_corpora(pairs, phi, 5, &ampl, 11);
    MlpModel ampf = make_model(2 * n, 2 * n, n, 0.01, 12);
    fit_standardization(ampf, c.ampf.train_x);
    train(ampf, c.ampf.train_x, c.ampf.train_y, c.ampf.val_x, c.ampf.val_y, cfg);

    const rmat fused = forward_batch(ampf, c.ampf.test_x).cwiseMax(0.0);
    const double fused_mse = set_mse(fused, c.ampf.test_y);
    const double initial_mse = set_mse(c.ampf.test_x.leftCols(n), c.ampf.test_y);
    const double aux_mse = set_mse(c.ampf.test_x.rightCols(n).cwiseMax(0.0), c.ampf.test_y);
    INFO("fused " << fused_mse << " initial " << initial_mse << " auxiliary " << aux_mse);
    REQUIRE(fused_mse <= std::min(initial_mse, aux_mse) * 1.05);

    // fusion of both modalities beats either single-input network trained identically
    auto train_single = [&](const rmat& train_x, const rmat& val_x, const rmat& test_x,
                            std::uint64_t seed) {
        MlpModel single = make_model(n, 2 * n, n, 0.01, seed);
        fit_standardization(single, train_x);
        TrainConfig scfg = cfg;
        scfg.seed = seed;
        train(single, train_x, c.ampf.train_y, val_x, c.ampf.val_y, scfg);
        return set_mse(forward_batch(single, test_x).cwiseMax(0.0), c.ampf.test_y);
    };
    const double only_initial =
        train_single(c.ampf.train_x.leftCols(n), c.ampf.val_x.leftCols(n),
                     c.ampf.test_x.leftCols(n), 13);
    const double only_aux =
        train_single(c.ampf.train_x.rightCols(n), c.ampf.val_x.rightCols(n),
                     c.ampf.test_x.rightCols(n), 14);
    INFO("fused " << fused_mse << " only-initial " << only_initial << " only-aux " << only_aux);
    REQUIRE(fused_mse < only_initial);
    REQUIRE(fused_mse < only_aux);
}

TEST_CASE("full fusion lowers noiseless NMSE versus recon-only") {
    const int n = 16;
    const auto pairs = make_pairs(1500, n, 4, 6, 41);
    const MeasurementMatrix phi = MeasurementMatrix::make(n, 2 * n, 41);

    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 64;
    cfg.learning_rate = 3e-3;
    cfg.early_stop_patience = 40;
    cfg.seed = 15;

    const Corpora ampl_corpus = build_training_corpora(pairs, phi, 5, nullptr, 15);
    MlpModel ampl = make_model(n, 2 * n, n, 0.01, 15);
    fit_standardization(ampl, ampl_corpus.ampl.train_x);
    train(ampl, ampl_corpus.ampl.train_x, ampl_corpus.ampl.train_y, ampl_corpus.ampl.val_x,
          ampl_corpus.ampl.val_y, cfg);
    const Corpora c = build_training_corpora(pairs, phi, 5, &ampl, 15);
    MlpModel ampf = make_model(2 * n, 2 * n, n, 0.01, 16);
    fit_standardization(ampf, c.ampf.train_x);
    train(ampf, c.ampf.train_x, c.ampf.train_y, c.ampf.val_x, c.ampf.val_y, cfg);

    const auto eval_pairs = make_pairs(400, n, 4, 6, 99);
    double fused_nmse = 0.0, recon_nmse = 0.0;
    for (const auto& p : eval_pairs) {
        const FeedbackVector fv = quantize(p.downlink_angular, phi, p.support);
        const RecoveredCsi full =
            recover(fv, p.uplink_angular, phi, 5, &ampl, &ampf, RecoveryMode::full_fusion);
        const RecoveredCsi recon =
            recover(fv, p.uplink_angular, phi, 5, nullptr, nullptr, RecoveryMode::recon_only);
        fused_nmse += nmse(p.downlink_angular, full.full);
        recon_nmse += nmse(p.downlink_angular, recon.full);
    }
    fused_nmse /= eval_pairs.size();
    recon_nmse /= eval_pairs.size();
    INFO("fused " << fused_nmse << " recon-only " << recon_nmse);
    REQUIRE(fused_nmse < recon_nmse);
}
