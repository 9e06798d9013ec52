#ifndef SUPERFEED_PHYLINK_HPP
#define SUPERFEED_PHYLINK_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "superfeed/chanrecip.hpp"
#include "superfeed/rng.hpp"

namespace superfeed {

// Walsh-Hadamard column set, Q^T Q = P I_T in exact integer arithmetic.
struct SpreadingMatrix {
    Eigen::MatrixXi entries;  // P x T, entries +-1
    int p_len = 0;
    int t_len = 0;
};

inline SpreadingMatrix build_spreading(int p, int t, std::uint64_t seed) {
    if (p < 1 || (p & (p - 1)) != 0) throw std::invalid_argument("build_spreading: P must be a power of two");
    if (t < 1 || t > p) throw std::invalid_argument("build_spreading: need 1 <= T <= P");

    // Sylvester construction: H(i,j) = (-1)^popcount(i & j)
    Eigen::MatrixXi h(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            h(i, j) = (std::popcount(static_cast<unsigned>(i & j)) & 1) ? -1 : 1;

    std::vector<int> cols(p);
    std::iota(cols.begin(), cols.end(), 0);
    auto rng = make_stream(seed, 0x57414c53ULL);  // "WALS"
    for (int i = p - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(cols[i], cols[j]);
    }

    SpreadingMatrix q;
    q.p_len = p;
    q.t_len = t;
    q.entries.resize(p, t);
    for (int j = 0; j < t; ++j) q.entries.col(j) = h.col(cols[j]);

    const Eigen::MatrixXi gram = q.entries.transpose() * q.entries;
    if (gram != p * Eigen::MatrixXi::Identity(t, t))
        throw std::logic_error("build_spreading: orthogonality check failed");
    return q;
}

enum class TxMode { superimposed, tdm };

struct TxConfig {
    double rho = 0.1;      // power proportion of CSI, ignored in tdm mode
    double energy = 1.0;   // per-sample transmit power
    int p_len = 512;
    TxMode mode = TxMode::superimposed;
};

// Bit pair (b0, b1) -> ((1-2 b0) + j(1-2 b1)) / sqrt(2); odd input padded
// with one zero bit.
inline cvec qpsk_modulate(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint8_t> b = bits;
    if (b.size() % 2 != 0) b.push_back(0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    cvec out(b.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = {(1.0 - 2.0 * b[2 * i]) * inv_sqrt2,
                                             (1.0 - 2.0 * b[2 * i + 1]) * inv_sqrt2};
    return out;
}

inline std::vector<std::uint8_t> qpsk_demodulate(const cvec& symbols) {
    std::vector<std::uint8_t> bits(2 * symbols.size());
    for (Eigen::Index i = 0; i < symbols.size(); ++i) {
        bits[2 * i] = symbols[i].real() > 0.0 ? 0 : 1;
        bits[2 * i + 1] = symbols[i].imag() > 0.0 ? 0 : 1;
    }
    return bits;
}

inline cvec random_qpsk(int n, std::mt19937_64& rng) {
    std::vector<std::uint8_t> bits(2 * n);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
    return qpsk_modulate(bits);
}

// s = (1/sqrt(T)) r Q^T, then power split rho/(1-rho) with the UL-US.
inline cvec transmit(const cvec& fv_symbols, const cvec& ulus, const SpreadingMatrix& q,
                     const TxConfig& cfg) {
    if (fv_symbols.size() != q.t_len) throw std::invalid_argument("transmit: symbol/Q mismatch");
    const cvec s = (q.entries.cast<std::complex<double>>() * fv_symbols) / std::sqrt(static_cast<double>(q.t_len));
    if (cfg.mode == TxMode::tdm) return std::sqrt(cfg.energy) * s;

    if (q.p_len <= q.t_len)
        throw std::invalid_argument("transmit: superimposed mode requires P > T");
    if (ulus.size() != q.p_len) throw std::invalid_argument("transmit: UL-US length mismatch");
    return std::sqrt(cfg.rho * cfg.energy) * s + std::sqrt((1.0 - cfg.rho) * cfg.energy) * ulus;
}

// Y = g x + N, noise CSCG with variance sigma2 per complex entry.
inline Eigen::MatrixXcd channel_apply(const cvec& tx, const cvec& g, double sigma2,
                                      std::mt19937_64& rng) {
    if (sigma2 < 0.0) throw std::invalid_argument("channel_apply: negative noise variance");
    const int n = static_cast<int>(g.size());
    const int p = static_cast<int>(tx.size());
    Eigen::MatrixXcd rx = g * tx.transpose();
    if (sigma2 > 0.0) {
        const double sd = std::sqrt(sigma2 / 2.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p; ++j)
                rx(i, j) += std::complex<double>(sd * randn(rng), sd * randn(rng));
    }
    return rx;
}

struct ReceiveResult {
    std::vector<std::uint8_t> fv_bits;    // first k_total detected bits
    std::vector<std::uint8_t> ulus_bits;  // empty in tdm mode
    cvec fv_symbols;                      // despread soft symbols, length T
};

// MRC combine, despread, hard-decide the FV, then cancel it and detect the
// UL-US (single-pass SIC). Normalization makes the noiseless rho=1 chain an
// exact identity.
inline ReceiveResult receive(const Eigen::MatrixXcd& rx, const cvec& g, const SpreadingMatrix& q,
                             const TxConfig& cfg, int k_total) {
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) throw std::invalid_argument("receive: all-zero uplink channel");
    if (k_total > 2 * q.t_len) throw std::invalid_argument("receive: k_total exceeds 2T");

    const double rho = (cfg.mode == TxMode::tdm) ? 1.0 : cfg.rho;
    const cvec y = (rx.transpose() * g.conjugate()) / g2;  // length P
    const double despread_scale =
        std::sqrt(static_cast<double>(q.t_len)) / (q.p_len * std::sqrt(rho * cfg.energy));
    const cvec r_hat = despread_scale * (q.entries.cast<std::complex<double>>().transpose() * y);

    ReceiveResult res;
    res.fv_symbols = r_hat;
    const std::vector<std::uint8_t> all_bits = qpsk_demodulate(r_hat);
    res.fv_bits.assign(all_bits.begin(), all_bits.begin() + k_total);

    if (cfg.mode == TxMode::superimposed) {
        const cvec r_hard = qpsk_modulate(all_bits);
        const cvec s_hat =
            (q.entries.cast<std::complex<double>>() * r_hard) / std::sqrt(static_cast<double>(q.t_len));
        const cvec residual =
            (y - std::sqrt(cfg.rho * cfg.energy) * s_hat) / std::sqrt((1.0 - cfg.rho) * cfg.energy);
        res.ulus_bits = qpsk_demodulate(residual);
    }
    return res;
}

}  // namespace superfeed

#endif
