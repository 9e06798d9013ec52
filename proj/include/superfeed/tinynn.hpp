#ifndef SUPERFEED_TINYNN_HPP
#define SUPERFEED_TINYNN_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "superfeed/rng.hpp"

namespace superfeed {

using rmat = Eigen::MatrixXd;

// One standardize -> LReLU hidden -> linear output network.
struct MlpModel {
    int in_dim = 0, hid_dim = 0, out_dim = 0;
    Eigen::VectorXd norm_mean, norm_std;  // fixed input standardization
    rmat w1;                              // in_dim x hid_dim
    Eigen::VectorXd b1;                   // hid_dim
    rmat w2;                              // hid_dim x out_dim
    Eigen::VectorXd b2;                   // out_dim
    double lrelu_slope = 0.01;
};

enum class Optimizer { sgd, adam };

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 128;
    int epochs = 100;
    Optimizer optimizer = Optimizer::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 1;
    int early_stop_patience = 10;  // <= 0 disables early stopping

    void validate() const {
        if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: negative learning rate");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (epochs < 0) throw std::invalid_argument("TrainConfig: negative epoch count");
    }
};

inline MlpModel make_model(int in_dim, int hid_dim, int out_dim, double slope,
                           std::uint64_t seed) {
    MlpModel m;
    m.in_dim = in_dim;
    m.hid_dim = hid_dim;
    m.out_dim = out_dim;
    m.lrelu_slope = slope;
    m.norm_mean = Eigen::VectorXd::Zero(in_dim);
    m.norm_std = Eigen::VectorXd::Ones(in_dim);
    m.b1 = Eigen::VectorXd::Zero(hid_dim);
    m.b2 = Eigen::VectorXd::Zero(out_dim);
    m.w1.resize(in_dim, hid_dim);
    m.w2.resize(hid_dim, out_dim);
    auto rng = make_stream(seed, 0x494e4954ULL);  // "INIT"
    const double lim1 = std::sqrt(6.0 / (in_dim + hid_dim));
    const double lim2 = std::sqrt(6.0 / (hid_dim + out_dim));
    for (int i = 0; i < in_dim; ++i)
        for (int j = 0; j < hid_dim; ++j) m.w1(i, j) = lim1 * (2.0 * randu(rng) - 1.0);
    for (int i = 0; i < hid_dim; ++i)
        for (int j = 0; j < out_dim; ++j) m.w2(i, j) = lim2 * (2.0 * randu(rng) - 1.0);
    return m;
}

// Freeze standardization statistics from the training inputs (rows = samples).
// Degenerate (constant) features fall back to std 1.
inline void fit_standardization(MlpModel& model, const rmat& inputs) {
    if (inputs.cols() != model.in_dim) throw std::invalid_argument("fit_standardization: dim mismatch");
    const double n = static_cast<double>(inputs.rows());
    model.norm_mean = inputs.colwise().mean();
    Eigen::VectorXd var =
        (inputs.rowwise() - model.norm_mean.transpose()).array().square().colwise().sum() / n;
    model.norm_std = var.array().sqrt();
    for (int i = 0; i < model.in_dim; ++i)
        if (model.norm_std[i] <= 0.0) model.norm_std[i] = 1.0;
}

namespace detail {
inline rmat standardize(const MlpModel& m, const rmat& x) {
    rmat xs = x.rowwise() - m.norm_mean.transpose();
    xs.array().rowwise() /= m.norm_std.transpose().array();
    return xs;
}
}  // namespace detail

inline rmat forward_batch(const MlpModel& m, const rmat& x) {
    if (x.cols() != m.in_dim) throw std::invalid_argument("forward: dimension mismatch");
    const rmat xs = detail::standardize(m, x);
    const rmat pre = (xs * m.w1).rowwise() + m.b1.transpose();
    const rmat hid = (pre.array().max(0.0) + m.lrelu_slope * pre.array().min(0.0)).matrix();
    return ((hid * m.w2).rowwise() + m.b2.transpose());
}

inline Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x) {
    return forward_batch(m, x.transpose()).row(0);
}

struct Gradients {
    rmat dw1, dw2;
    Eigen::VectorXd db1, db2;
};

// Batch-mean squared L2 error and its gradient.
inline double loss_and_grad(const MlpModel& m, const rmat& x, const rmat& y, Gradients& g) {
    const double batch = static_cast<double>(x.rows());
    const rmat xs = detail::standardize(m, x);
    const rmat pre = (xs * m.w1).rowwise() + m.b1.transpose();
    const rmat hid = (pre.array().max(0.0) + m.lrelu_slope * pre.array().min(0.0)).matrix();
    const rmat out = (hid * m.w2).rowwise() + m.b2.transpose();
    const rmat diff = out - y;
    const double loss = diff.array().square().rowwise().sum().mean();

    const rmat dout = (2.0 / batch) * diff;
    g.dw2 = hid.transpose() * dout;
    g.db2 = dout.colwise().sum();
    rmat dpre = dout * m.w2.transpose();
    dpre.array() *=
        (pre.array() >= 0.0).cast<double>() * (1.0 - m.lrelu_slope) + m.lrelu_slope;
    g.dw1 = xs.transpose() * dpre;
    g.db1 = dpre.colwise().sum();
    return loss;
}

inline double mse_loss(const MlpModel& m, const rmat& x, const rmat& y) {
    return (forward_batch(m, x) - y).array().square().rowwise().sum().mean();
}

struct LossHistory {
    std::vector<double> train;
    std::vector<double> val;
    int best_epoch = -1;
};

// Mini-batch training with a fixed shuffle order and sequential gradient
// application, so identical configs give bit-identical histories.
inline LossHistory train(MlpModel& model, const rmat& x_train, const rmat& y_train,
                         const rmat& x_val, const rmat& y_val, const TrainConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(x_train.rows());
    if (n == 0 || y_train.rows() != n) throw std::invalid_argument("train: bad training set shapes");

    auto rng = make_stream(cfg.seed, 0x545241494eULL);  // "TRAIN"
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    Gradients g;
    // Adam state
    rmat mw1 = rmat::Zero(model.in_dim, model.hid_dim), vw1 = mw1;
    rmat mw2 = rmat::Zero(model.hid_dim, model.out_dim), vw2 = mw2;
    Eigen::VectorXd mb1 = Eigen::VectorXd::Zero(model.hid_dim), vb1 = mb1;
    Eigen::VectorXd mb2 = Eigen::VectorXd::Zero(model.out_dim), vb2 = mb2;
    long long step = 0;

    auto apply = [&](rmat& w, const rmat& dw, rmat& mom, rmat& vel) {
        if (cfg.optimizer == Optimizer::sgd) {
            w -= cfg.learning_rate * dw;
        } else {
            mom = cfg.adam_beta1 * mom + (1.0 - cfg.adam_beta1) * dw;
            vel = cfg.adam_beta2 * vel + (1.0 - cfg.adam_beta2) * dw.array().square().matrix();
            const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            w.array() -= cfg.learning_rate * (mom.array() / bc1) /
                         ((vel.array() / bc2).sqrt() + cfg.adam_eps);
        }
    };
    auto apply_v = [&](Eigen::VectorXd& w, const Eigen::VectorXd& dw, Eigen::VectorXd& mom,
                       Eigen::VectorXd& vel) {
        if (cfg.optimizer == Optimizer::sgd) {
            w -= cfg.learning_rate * dw;
        } else {
            mom = cfg.adam_beta1 * mom + (1.0 - cfg.adam_beta1) * dw;
            vel = cfg.adam_beta2 * vel + (1.0 - cfg.adam_beta2) * dw.array().square().matrix();
            const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            w.array() -= cfg.learning_rate * (mom.array() / bc1) /
                         ((vel.array() / bc2).sqrt() + cfg.adam_eps);
        }
    };

    LossHistory hist;
    MlpModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    const bool have_val = x_val.rows() > 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        int n_batches = 0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int bs = std::min(cfg.batch_size, n - start);
            rmat xb(bs, model.in_dim), yb(bs, model.out_dim);
            for (int i = 0; i < bs; ++i) {
                xb.row(i) = x_train.row(order[start + i]);
                yb.row(i) = y_train.row(order[start + i]);
            }
            ++step;
            const double loss = loss_and_grad(model, xb, yb, g);
            if (!std::isfinite(loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(n_batches));
            apply(model.w1, g.dw1, mw1, vw1);
            apply(model.w2, g.dw2, mw2, vw2);
            apply_v(model.b1, g.db1, mb1, vb1);
            apply_v(model.b2, g.db2, mb2, vb2);
            epoch_loss += loss;
            ++n_batches;
        }
        hist.train.push_back(epoch_loss / n_batches);
        if (have_val) {
            const double vl = mse_loss(model, x_val, y_val);
            hist.val.push_back(vl);
            if (vl < best_val) {
                best_val = vl;
                best = model;
                hist.best_epoch = epoch;
                since_best = 0;
            } else if (cfg.early_stop_patience > 0 && ++since_best >= cfg.early_stop_patience) {
                break;
            }
        }
    }
    if (have_val && hist.best_epoch >= 0) model = best;
    return hist;
}

inline long long count_weights(const MlpModel& m) {
    return static_cast<long long>(m.in_dim) * m.hid_dim + m.hid_dim +
           static_cast<long long>(m.hid_dim) * m.out_dim + m.out_dim;
}

// Dense-layer multiply-add convention: (2 in - 1) hid + (2 hid - 1) out.
inline long long count_flops(const MlpModel& m) {
    return (2LL * m.in_dim - 1) * m.hid_dim + (2LL * m.hid_dim - 1) * m.out_dim;
}

// ---------------------------------------------------------------------------
// Model file: versioned structured text, full double precision.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_vec(std::ostream& out, const char* tag, const Eigen::VectorXd& v) {
    out << tag;
    char buf[32];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), " %.17g", v[i]);
        out << buf;
    }
    out << "\n";
}

inline void write_mat(std::ostream& out, const char* tag, const rmat& m) {
    out << tag;
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), " %.17g", m(i, j));
            out << buf;
        }
    out << "\n";
}

inline Eigen::VectorXd read_vec(std::istream& in, const std::string& tag, Eigen::Index size) {
    std::string got;
    if (!(in >> got) || got != tag)
        throw std::runtime_error("load_model: expected field '" + tag + "', got '" + got + "'");
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i)
        if (!(in >> v[i])) throw std::runtime_error("load_model: short field '" + tag + "'");
    return v;
}

inline rmat read_mat(std::istream& in, const std::string& tag, Eigen::Index rows,
                     Eigen::Index cols) {
    std::string got;
    if (!(in >> got) || got != tag)
        throw std::runtime_error("load_model: expected field '" + tag + "', got '" + got + "'");
    rmat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(in >> m(i, j))) throw std::runtime_error("load_model: short field '" + tag + "'");
    return m;
}

}  // namespace detail

inline void save_model(const MlpModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out << "SFMLP 1\n";
    out << "dims " << m.in_dim << " " << m.hid_dim << " " << m.out_dim << "\n";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", m.lrelu_slope);
    out << "slope " << buf << "\n";
    detail::write_vec(out, "norm_mean", m.norm_mean);
    detail::write_vec(out, "norm_std", m.norm_std);
    detail::write_mat(out, "w1", m.w1);
    detail::write_vec(out, "b1", m.b1);
    detail::write_mat(out, "w2", m.w2);
    detail::write_vec(out, "b2", m.b2);
    if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

inline MlpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "SFMLP" || version != 1)
        throw std::runtime_error("load_model: unsupported schema '" + magic + " " +
                                 std::to_string(version) + "'");
    MlpModel m;
    std::string tag;
    in >> tag >> m.in_dim >> m.hid_dim >> m.out_dim;
    if (tag != "dims" || m.in_dim < 1 || m.hid_dim < 1 || m.out_dim < 1)
        throw std::runtime_error("load_model: bad dims");
    in >> tag >> m.lrelu_slope;
    if (tag != "slope") throw std::runtime_error("load_model: expected field 'slope'");
    m.norm_mean = detail::read_vec(in, "norm_mean", m.in_dim);
    m.norm_std = detail::read_vec(in, "norm_std", m.in_dim);
    if ((m.norm_std.array() <= 0.0).any())
        throw std::runtime_error("load_model: norm_std must be positive");
    m.w1 = detail::read_mat(in, "w1", m.in_dim, m.hid_dim);
    m.b1 = detail::read_vec(in, "b1", m.hid_dim);
    m.w2 = detail::read_mat(in, "w2", m.hid_dim, m.out_dim);
    m.b2 = detail::read_vec(in, "b2", m.out_dim);
    return m;
}

}  // namespace superfeed

#endif
