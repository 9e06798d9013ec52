#ifndef SUPERFEED_PIPELINE_HPP
#define SUPERFEED_PIPELINE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "superfeed/chanrecip.hpp"
#include "superfeed/onebitcs.hpp"
#include "superfeed/phylink.hpp"
#include "superfeed/tinynn.hpp"

namespace superfeed {

inline double nmse(const cvec& truth, const cvec& estimate) {
    if (truth.size() != estimate.size()) throw std::invalid_argument("nmse: length mismatch");
    const double denom = truth.squaredNorm();
    if (denom == 0.0) throw std::invalid_argument("nmse: zero-norm truth");
    return (truth - estimate).squaredNorm() / denom;
}

struct RecoveredCsi {
    rvec amplitude;             // fused (or initial, in recon-only mode)
    rvec angle;
    cvec full;                  // amplitude .* exp(j angle)
    rvec auxiliary_amplitude;   // AMPL output, empty in recon-only mode
    rvec fused_input;           // [initial | auxiliary], empty in recon-only mode
    long long recon_flops = 0;
    bool fusion_ran = false;
};

inline cvec recombine(const rvec& amplitude, const rvec& angle) {
    cvec full(amplitude.size());
    for (Eigen::Index i = 0; i < amplitude.size(); ++i)
        full[i] = std::polar(amplitude[i], angle[i]);
    return full;
}

// Auxiliary downlink amplitude from the uplink angular amplitude.
inline rvec ampl_infer(const cvec& uplink_angular, const MlpModel& model) {
    const int n = static_cast<int>(uplink_angular.size());
    if (model.in_dim != n || model.out_dim != n)
        throw std::invalid_argument("ampl_infer: model shape mismatch");
    Eigen::VectorXd amp(n);
    for (int i = 0; i < n; ++i) amp[i] = std::abs(uplink_angular[i]);
    return forward(model, amp).cwiseMax(0.0);
}

inline rvec fuse_amplitudes(const rvec& initial, const rvec& auxiliary, const MlpModel& model) {
    const int n = static_cast<int>(initial.size());
    if (auxiliary.size() != n) throw std::invalid_argument("fuse_amplitudes: length mismatch");
    if (model.in_dim != 2 * n || model.out_dim != n)
        throw std::invalid_argument("fuse_amplitudes: model shape mismatch");
    Eigen::VectorXd fused_input(2 * n);
    fused_input << initial, auxiliary;
    return forward(model, fused_input).cwiseMax(0.0);
}

enum class RecoveryMode { recon_only, full_fusion };

// Simplified reconstruction, then amplitude learning and fusion; the fused
// amplitude is recombined with the reconstructed angle.
inline RecoveredCsi recover(const FeedbackVector& fv_detected, const cvec& uplink_angular,
                            const MeasurementMatrix& phi, int alpha, const MlpModel* ampl_model,
                            const MlpModel* ampf_model,
                            RecoveryMode mode = RecoveryMode::full_fusion, double step = 1.0) {
    const ReconstructionResult recon = sca_biht(fv_detected, phi, alpha, step);
    RecoveredCsi out;
    out.angle = recon.angle;
    out.recon_flops = recon.flops;
    if (mode == RecoveryMode::recon_only) {
        out.amplitude = recon.amplitude;
        out.full = recombine(out.amplitude, out.angle);
        return out;
    }
    if (ampl_model == nullptr || ampf_model == nullptr)
        throw std::invalid_argument("recover: fusion mode requires both models");
    out.auxiliary_amplitude = ampl_infer(uplink_angular, *ampl_model);
    out.fused_input.resize(2 * recon.amplitude.size());
    out.fused_input << recon.amplitude, out.auxiliary_amplitude;
    out.amplitude = fuse_amplitudes(recon.amplitude, out.auxiliary_amplitude, *ampf_model);
    out.full = recombine(out.amplitude, out.angle);
    out.fusion_ran = true;
    return out;
}

// ---------------------------------------------------------------------------
// Training corpora. Per channel pair: AMPL input |g_angular|, AMPF input
// [initial amplitude from noiseless reconstruction | AMPL output], target is
// the true downlink angular amplitude. Split 70/15/15 by a seeded shuffle.
// ---------------------------------------------------------------------------

struct SupervisedSet {
    rmat train_x, train_y, val_x, val_y, test_x, test_y;
};

struct CorpusRecord {
    rvec ampl_input;       // |uplink_angular|
    rvec initial;          // noiseless alpha-iteration reconstruction amplitude
    rvec auxiliary;        // AMPL output (zero when no AMPL model yet)
    rvec target;           // |downlink_angular|
};

// Optional noise-free link pass for corpus generation: the FV crosses the
// superimposed uplink with sigma^2 = 0, so the initial amplitudes carry the
// same superimposed-interference corruption the deployed receiver sees.
struct CorpusLink {
    const SpreadingMatrix* spreading = nullptr;
    double rho = 0.10;
    double energy = 1.0;
    int p_len = 512;
    std::uint64_t seed = 1;
};

inline std::vector<CorpusRecord> build_corpus_records(const std::vector<ChannelPair>& pairs,
                                                      const MeasurementMatrix& phi, int alpha,
                                                      const MlpModel* ampl_model,
                                                      double step = 1.0,
                                                      const CorpusLink* link = nullptr) {
    std::vector<CorpusRecord> records;
    records.reserve(pairs.size());
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const auto& p = pairs[r];
        CorpusRecord rec;
        const int n = static_cast<int>(p.downlink_angular.size());
        rec.ampl_input.resize(n);
        rec.target.resize(n);
        for (int i = 0; i < n; ++i) {
            rec.ampl_input[i] = std::abs(p.uplink_angular[i]);
            rec.target[i] = std::abs(p.downlink_angular[i]);
        }
        FeedbackVector fv = quantize(p.downlink_angular, phi, p.support);
        if (link != nullptr) {
            TxConfig tx;
            tx.rho = link->rho;
            tx.energy = link->energy;
            tx.p_len = link->p_len;
            auto rng = make_stream(link->seed, 0xC0DAULL, r);
            std::vector<std::uint8_t> ulus_bits(2 * link->p_len);
            for (auto& b : ulus_bits) b = static_cast<std::uint8_t>(rng() & 1);
            const cvec x =
                transmit(qpsk_modulate(fv_to_bits(fv)), qpsk_modulate(ulus_bits), *link->spreading,
                         tx);
            const Eigen::MatrixXcd rx = channel_apply(x, p.uplink_spatial, 0.0, rng);
            const ReceiveResult det =
                receive(rx, p.uplink_spatial, *link->spreading, tx, fv.k_total());
            fv = fv_from_bits(det.fv_bits, n, phi.m);
        }
        try {
            rec.initial = sca_biht(fv, phi, alpha, step).amplitude;
        } catch (const std::runtime_error&) {
            rec.initial = rvec::Zero(n);  // degenerate detected support
        }
        rec.auxiliary =
            ampl_model ? ampl_infer(p.uplink_angular, *ampl_model) : rvec::Zero(n);
        records.push_back(std::move(rec));
    }
    return records;
}

namespace detail {

inline std::vector<int> split_order(int count, std::uint64_t seed) {
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_stream(seed, 0x53504c4954ULL);  // "SPLIT"
    for (int i = count - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[i], order[j]);
    }
    return order;
}

}  // namespace detail

struct Corpora {
    SupervisedSet ampl;  // |g_angular| -> target amplitude
    SupervisedSet ampf;  // [initial | auxiliary] -> target amplitude (needs AMPL model)
    bool has_ampf = false;
};

inline Corpora build_training_corpora(const std::vector<ChannelPair>& pairs,
                                      const MeasurementMatrix& phi, int alpha,
                                      const MlpModel* ampl_model, std::uint64_t seed,
                                      double step = 1.0, const CorpusLink* link = nullptr) {
    const int count = static_cast<int>(pairs.size());
    const int n_train = count * 70 / 100;
    const int n_val = count * 15 / 100;
    const int n_test = count - n_train - n_val;
    if (n_train < 1 || n_val < 1 || n_test < 1)
        throw std::invalid_argument("build_training_corpora: dataset too small for 70/15/15 split");

    const auto records = build_corpus_records(pairs, phi, alpha, ampl_model, step, link);
    const auto order = detail::split_order(count, seed);
    const int n = static_cast<int>(records.front().target.size());

    auto fill = [&](SupervisedSet& set, int in_dim, auto&& input_of) {
        set.train_x.resize(n_train, in_dim);
        set.train_y.resize(n_train, n);
        set.val_x.resize(n_val, in_dim);
        set.val_y.resize(n_val, n);
        set.test_x.resize(n_test, in_dim);
        set.test_y.resize(n_test, n);
        for (int i = 0; i < count; ++i) {
            const CorpusRecord& rec = records[order[i]];
            if (i < n_train) {
                set.train_x.row(i) = input_of(rec).transpose();
                set.train_y.row(i) = rec.target.transpose();
            } else if (i < n_train + n_val) {
                set.val_x.row(i - n_train) = input_of(rec).transpose();
                set.val_y.row(i - n_train) = rec.target.transpose();
            } else {
                set.test_x.row(i - n_train - n_val) = input_of(rec).transpose();
                set.test_y.row(i - n_train - n_val) = rec.target.transpose();
            }
        }
    };

    Corpora corpora;
    fill(corpora.ampl, n, [](const CorpusRecord& rec) -> rvec { return rec.ampl_input; });
    if (ampl_model != nullptr) {
        fill(corpora.ampf, 2 * n, [](const CorpusRecord& rec) -> rvec {
            rvec x(2 * rec.initial.size());
            x << rec.initial, rec.auxiliary;
            return x;
        });
        corpora.has_ampf = true;
    }
    return corpora;
}

// Corpus file: .cpd record layout plus a per-record block of initial,
// auxiliary, and target amplitudes (f32). Magic "CPC1".
inline std::size_t corpus_write(const std::vector<ChannelPair>& pairs,
                                const std::vector<CorpusRecord>& records,
                                const std::string& path) {
    if (pairs.size() != records.size())
        throw std::invalid_argument("corpus_write: pair/record count mismatch");
    const int n = pairs.empty() ? 0 : static_cast<int>(pairs.front().downlink_angular.size());
    const int s = pairs.empty() ? 0 : pairs.front().sparsity;
    std::string buf;
    buf.append("CPC1");
    detail::put_u32(buf, static_cast<std::uint32_t>(n));
    detail::put_u32(buf, static_cast<std::uint32_t>(s));
    detail::put_u64(buf, pairs.size());
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const auto& p = pairs[r];
        for (int i = 0; i < n; ++i) {
            detail::put_f32(buf, static_cast<float>(p.downlink_angular[i].real()));
            detail::put_f32(buf, static_cast<float>(p.downlink_angular[i].imag()));
        }
        for (int i = 0; i < n; ++i) {
            detail::put_f32(buf, static_cast<float>(p.uplink_spatial[i].real()));
            detail::put_f32(buf, static_cast<float>(p.uplink_spatial[i].imag()));
        }
        for (int i = 0; i < n; ++i) buf.push_back(static_cast<char>(p.support[i]));
        for (int i = 0; i < n; ++i) detail::put_f32(buf, static_cast<float>(records[r].initial[i]));
        for (int i = 0; i < n; ++i)
            detail::put_f32(buf, static_cast<float>(records[r].auxiliary[i]));
        for (int i = 0; i < n; ++i) detail::put_f32(buf, static_cast<float>(records[r].target[i]));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("corpus_write: cannot open " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("corpus_write: short write to " + path);
    return pairs.size();
}

}  // namespace superfeed

#endif
