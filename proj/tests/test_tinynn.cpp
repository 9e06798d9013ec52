#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "superfeed/tinynn.hpp"

using namespace superfeed;
namespace fs = std::filesystem;

TEST_CASE("forward knowns") {
    MlpModel m = make_model(2, 3, 2, 0.01, 1);
    m.w1.setZero();
    m.w2.setZero();
    m.b2 << 1.5, -0.5;
    Eigen::VectorXd x(2);
    x << 3.0, -4.0;
    const Eigen::VectorXd y = forward(m, x);
    REQUIRE(y[0] == 1.5);
    REQUIRE(y[1] == -0.5);
}

TEST_CASE("forward LReLU negative branch") {
    MlpModel m = make_model(1, 1, 1, 0.01, 1);
    m.w1(0, 0) = 1.0;
    m.b1[0] = 0.0;
    m.w2(0, 0) = 1.0;
    m.b2[0] = 0.0;
    Eigen::VectorXd x(1);
    x << -1.0;
    REQUIRE(forward(m, x)[0] == Catch::Approx(-0.01));
}

TEST_CASE("input equal to the mean zeroes the standardized input") {
    MlpModel m = make_model(3, 4, 2, 0.1, 7);
    m.norm_mean << 1.0, -2.0, 0.5;
    m.norm_std << 2.0, 1.0, 3.0;
    const Eigen::VectorXd at_mean = forward(m, m.norm_mean);
    const Eigen::VectorXd hid =
        (m.b1.array().max(0.0) + m.lrelu_slope * m.b1.array().min(0.0)).matrix();
    const Eigen::VectorXd expected = m.w2.transpose() * hid + m.b2;
    REQUIRE((at_mean - expected).norm() < 1e-14);
}

TEST_CASE("forward rejects dimension mismatch") {
    const MlpModel m = make_model(4, 8, 4, 0.01, 1);
    REQUIRE_THROWS_AS(forward(m, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
    auto rng = make_stream(99);
    const double eps = 1e-5;
    double worst = 0.0;
    for (int point = 0; point < 20; ++point) {
        MlpModel m = make_model(4, 8, 4, 0.01, 100 + point);
        rmat x(3, 4), y(3, 4);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) {
                x(i, j) = randn(rng);
                y(i, j) = randn(rng);
            }
        Gradients g;
        loss_and_grad(m, x, y, g);

        auto check = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + eps;
            const double up = mse_loss(m, x, y);
            param = saved - eps;
            const double down = mse_loss(m, x, y);
            param = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double rel = std::abs(analytic - numeric) /
                               std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            worst = std::max(worst, rel);
        };
        // a few entries from every parameter tensor
        for (int k = 0; k < 5; ++k) {
            const int i = static_cast<int>(rng() % 4), j = static_cast<int>(rng() % 8);
            check(m.w1(i, j), g.dw1(i, j));
            check(m.w2(j % 8, i), g.dw2(j % 8, i));
            check(m.b1[j], g.db1[j]);
            check(m.b2[i], g.db2[i]);
        }
    }
    INFO("worst relative error " << worst);
    REQUIRE(worst < 1e-4);
}

TEST_CASE("standardization statistics") {
    auto rng = make_stream(5);
    rmat x(500, 6);
    for (int i = 0; i < 500; ++i)
        for (int j = 0; j < 6; ++j) x(i, j) = 3.0 * randn(rng) + j;
    MlpModel m = make_model(6, 4, 2, 0.01, 1);
    fit_standardization(m, x);
    const rmat xs = detail::standardize(m, x);
    for (int j = 0; j < 6; ++j) {
        REQUIRE(std::abs(xs.col(j).mean()) < 1e-8);
        const double sd = std::sqrt(xs.col(j).array().square().sum() / 500);
        REQUIRE(sd == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("training fits a linear target") {
    auto rng = make_stream(6);
    rmat x(256, 1), y(256, 1);
    for (int i = 0; i < 256; ++i) {
        x(i, 0) = randu(rng) + 0.5;  // keep the hidden unit in the linear region
        y(i, 0) = 2.0 * x(i, 0);
    }
    MlpModel m = make_model(1, 1, 1, 0.01, 4);
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 200;
    cfg.batch_size = 32;
    cfg.seed = 4;
    cfg.early_stop_patience = 0;
    const LossHistory hist = train(m, x, y, rmat(0, 1), rmat(0, 1), cfg);
    REQUIRE(hist.train.back() < 1e-4);
}

TEST_CASE("zero learning rate freezes the loss") {
    auto rng = make_stream(7);
    rmat x(64, 2), y(64, 1);
    for (int i = 0; i < 64; ++i) {
        x(i, 0) = randn(rng);
        x(i, 1) = randn(rng);
        y(i, 0) = x(i, 0) - x(i, 1);
    }
    MlpModel m = make_model(2, 4, 1, 0.01, 9);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 5;
    cfg.batch_size = 64;
    cfg.early_stop_patience = 0;
    const LossHistory hist = train(m, x, y, rmat(0, 2), rmat(0, 1), cfg);
    // batch order reshuffles each epoch, so the average is only summation-order equal
    for (double l : hist.train) REQUIRE(l == Catch::Approx(hist.train.front()).epsilon(1e-12));
}

TEST_CASE("training is deterministic") {
    auto rng = make_stream(8);
    rmat x(200, 3), y(200, 2);
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = randn(rng);
        y(i, 0) = x(i, 0) * x(i, 1);
        y(i, 1) = x(i, 2);
    }
    rmat xv = x.topRows(40), yv = y.topRows(40);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.seed = 77;

    auto run = [&]() {
        MlpModel m = make_model(3, 8, 2, 0.01, 42);
        fit_standardization(m, x);
        return train(m, x, y, xv, yv, cfg);
    };
    const LossHistory a = run();
    const LossHistory b = run();
    REQUIRE(a.train == b.train);
    REQUIRE(a.val == b.val);
}

TEST_CASE("weight and FLOP counters match the closed forms") {
    const MlpModel ampl = make_model(64, 128, 64, 0.01, 1);
    const MlpModel ampf = make_model(128, 128, 64, 0.01, 1);
    REQUIRE(count_weights(ampl) == 16576);
    REQUIRE(count_weights(ampf) == 24768);
    REQUIRE(count_weights(ampl) + count_weights(ampf) == 10 * 64 * 64 + 6 * 64);
    REQUIRE(count_flops(ampl) + count_flops(ampf) == 20 * 64 * 64 - 6 * 64);
    REQUIRE(count_flops(ampl) + count_flops(ampf) == 81536);

    const MlpModel tiny = make_model(1, 1, 1, 0.01, 1);
    REQUIRE(count_weights(tiny) == 4);

    for (int n : {16, 32, 128}) {
        const MlpModel a = make_model(n, 2 * n, n, 0.01, 1);
        const MlpModel f = make_model(2 * n, 2 * n, n, 0.01, 1);
        REQUIRE(count_weights(a) + count_weights(f) == 10LL * n * n + 6 * n);
        REQUIRE(count_flops(a) + count_flops(f) == 20LL * n * n - 6 * n);
    }
}

TEST_CASE("model file round trip") {
    auto rng = make_stream(13);
    MlpModel m = make_model(64, 128, 64, 0.015, 3);
    rmat x(50, 64);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 64; ++j) x(i, j) = randn(rng);
    fit_standardization(m, x);

    const std::string path = (fs::temp_directory_path() / "sf_model.txt").string();
    save_model(m, path);
    const MlpModel loaded = load_model(path);
    REQUIRE(loaded.in_dim == 64);
    REQUIRE(loaded.hid_dim == 128);
    REQUIRE(loaded.out_dim == 64);
    REQUIRE(loaded.w1 == m.w1);
    REQUIRE(loaded.norm_std == m.norm_std);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd v(64);
        for (int j = 0; j < 64; ++j) v[j] = randn(rng);
        REQUIRE(forward(m, v) == forward(loaded, v));
    }
    fs::remove(path);
}

TEST_CASE("model file schema errors") {
    const std::string path = (fs::temp_directory_path() / "sf_model_bad.txt").string();
    {
        std::ofstream out(path);
        out << "SFMLP 1\ndims 2 2 1\nslope 0.01\nnorm_mean 0 0\n";
        // norm_std missing entirely
    }
    REQUIRE_THROWS_WITH(load_model(path), Catch::Matchers::ContainsSubstring("norm_std"));
    {
        std::ofstream out(path);
        out << "SFMLP 9\n";
    }
    REQUIRE_THROWS_WITH(load_model(path), Catch::Matchers::ContainsSubstring("unsupported schema"));
    fs::remove(path);
}
