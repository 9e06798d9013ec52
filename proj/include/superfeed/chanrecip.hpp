#ifndef SUPERFEED_CHANRECIP_HPP
#define SUPERFEED_CHANRECIP_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "superfeed/rng.hpp"

namespace superfeed {

using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

// One realization of reciprocal uplink/downlink channels.
struct ChannelPair {
    cvec downlink_angular;        // S-sparse, unit L2 norm
    cvec uplink_spatial;
    cvec uplink_angular;          // unitary DFT of uplink_spatial
    std::vector<std::uint8_t> support;
    int sparsity = 0;
};

struct ChannelGenConfig {
    int n_antennas = 64;          // power of two (DFT size)
    int sparsity = 8;
    int n_paths = 8;
    double angle_spread = std::numbers::pi;   // radians, AoDs uniform in +-spread/2
    double per_path_power_decay_db = 6.0;
    double gain_correlation = 0.9;            // UL/DL per-path magnitude correlation
    double ul_dl_frequency_ratio = 1.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_antennas < 2 || (n_antennas & (n_antennas - 1)) != 0)
            throw std::invalid_argument("n_antennas must be a power of two");
        if (sparsity < 1 || sparsity > n_paths || n_paths > n_antennas)
            throw std::invalid_argument("require 1 <= sparsity <= n_paths <= n_antennas");
        if (gain_correlation < 0.0 || gain_correlation > 1.0)
            throw std::invalid_argument("gain_correlation must be in [0,1]");
        if (ul_dl_frequency_ratio <= 0.0)
            throw std::invalid_argument("ul_dl_frequency_ratio must be positive");
    }
};

// Unitary DFT. Direct O(N^2) evaluation; N stays small (<= 512) here.
inline cvec to_angular(const cvec& spatial) {
    const int n = static_cast<int>(spatial.size());
    cvec out(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int m = 0; m < n; ++m) {
        std::complex<double> acc(0.0, 0.0);
        for (int k = 0; k < n; ++k) {
            const double ang = -2.0 * std::numbers::pi * m * k / n;
            acc += spatial[k] * std::polar(1.0, ang);
        }
        out[m] = acc * scale;
    }
    return out;
}

// Keep the S largest-magnitude entries, zero the rest, renormalize to unit
// norm. Ties break toward the lowest index.
inline std::pair<cvec, std::vector<std::uint8_t>> sparsify(const cvec& v, int s) {
    const int n = static_cast<int>(v.size());
    if (s < 1 || s > n) throw std::invalid_argument("sparsify: S out of range");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(v[a]) > std::abs(v[b]);
    });
    cvec sparse = cvec::Zero(n);
    std::vector<std::uint8_t> support(n, 0);
    for (int i = 0; i < s; ++i) {
        sparse[idx[i]] = v[idx[i]];
        support[idx[i]] = 1;
    }
    const double norm = sparse.norm();
    if (norm == 0.0) throw std::invalid_argument("sparsify: all-zero input");
    sparse /= norm;
    return {sparse, support};
}

// ULA steering vector; phase_scale models the UL/DL carrier offset.
inline cvec steering(int n, double aod, double phase_scale = 1.0) {
    cvec a(n);
    const double base = std::numbers::pi * std::sin(aod) * phase_scale;
    for (int k = 0; k < n; ++k) a[k] = std::polar(1.0, base * k);
    return a;
}

namespace detail {

struct PairWithDense {
    ChannelPair pair;
    cvec dense_downlink_angular;  // pre-sparsification
};

inline PairWithDense generate_pair_dense(const ChannelGenConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    const int n = cfg.n_antennas;
    const double rho = cfg.gain_correlation;

    // normalized per-path mean powers, exponential decay in dB
    std::vector<double> power(cfg.n_paths);
    double psum = 0.0;
    for (int p = 0; p < cfg.n_paths; ++p) {
        power[p] = std::pow(10.0, -cfg.per_path_power_decay_db * p / 10.0);
        psum += power[p];
    }

    cvec dl_spatial = cvec::Zero(n);
    cvec ul_spatial = cvec::Zero(n);
    for (int p = 0; p < cfg.n_paths; ++p) {
        const double aod = (randu(rng) - 0.5) * cfg.angle_spread;
        const double phi_dl = 2.0 * std::numbers::pi * randu(rng);
        const double phi_ul = 2.0 * std::numbers::pi * randu(rng);
        const std::complex<double> z1(randn(rng) / std::sqrt(2.0), randn(rng) / std::sqrt(2.0));
        const std::complex<double> z2(randn(rng) / std::sqrt(2.0), randn(rng) / std::sqrt(2.0));
        // gain reciprocity acts on path magnitudes; phases stay independent
        const double m_dl = std::abs(z1);
        const double m_ul = rho * std::abs(z1) + std::sqrt(1.0 - rho * rho) * std::abs(z2);
        const double amp = std::sqrt(power[p] / psum);
        dl_spatial += amp * m_dl * std::polar(1.0, phi_dl) * steering(n, aod);
        ul_spatial += amp * m_ul * std::polar(1.0, phi_ul) *
                      steering(n, aod, cfg.ul_dl_frequency_ratio);
    }

    PairWithDense out;
    out.dense_downlink_angular = to_angular(dl_spatial);
    auto [sparse, support] = sparsify(out.dense_downlink_angular, cfg.sparsity);
    out.pair.downlink_angular = std::move(sparse);
    out.pair.support = std::move(support);
    out.pair.uplink_spatial = ul_spatial;
    out.pair.uplink_angular = to_angular(ul_spatial);
    out.pair.sparsity = cfg.sparsity;
    return out;
}

}  // namespace detail

inline ChannelPair generate_pair(const ChannelGenConfig& cfg, std::mt19937_64& rng) {
    return detail::generate_pair_dense(cfg, rng).pair;
}

// ---------------------------------------------------------------------------
// .cpd dataset format: "CPD1" | u32 N | u32 S | u64 count | records.
// Record: N x (f32 re, f32 im) downlink_angular, N x (f32 re, f32 im)
// uplink_spatial, N bytes support. All little-endian.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::string& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f32(std::string& b, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(b, u);
}

struct Cursor {
    const std::string& data;
    std::size_t pos = 0;
    const char* what;

    void need(std::size_t n) const {
        if (pos + n > data.size())
            throw std::runtime_error(std::string(what) + ": truncated file at byte offset " +
                                     std::to_string(pos));
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() {
        const std::uint32_t u = u32();
        float v;
        std::memcpy(&v, &u, 4);
        return v;
    }
    std::uint8_t byte() {
        need(1);
        return static_cast<std::uint8_t>(data[pos++]);
    }
};

inline std::string slurp(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(std::string(what) + ": cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace detail

inline std::size_t dataset_write(const std::vector<ChannelPair>& pairs, const std::string& path) {
    const int n = pairs.empty() ? 0 : static_cast<int>(pairs.front().downlink_angular.size());
    const int s = pairs.empty() ? 0 : pairs.front().sparsity;
    for (const auto& p : pairs)
        if (p.downlink_angular.size() != n)
            throw std::invalid_argument("dataset_write: mixed N in pair sequence");

    std::string buf;
    buf.append("CPD1");
    detail::put_u32(buf, static_cast<std::uint32_t>(n));
    detail::put_u32(buf, static_cast<std::uint32_t>(s));
    detail::put_u64(buf, pairs.size());
    for (const auto& p : pairs) {
        for (int i = 0; i < n; ++i) {
            detail::put_f32(buf, static_cast<float>(p.downlink_angular[i].real()));
            detail::put_f32(buf, static_cast<float>(p.downlink_angular[i].imag()));
        }
        for (int i = 0; i < n; ++i) {
            detail::put_f32(buf, static_cast<float>(p.uplink_spatial[i].real()));
            detail::put_f32(buf, static_cast<float>(p.uplink_spatial[i].imag()));
        }
        for (int i = 0; i < n; ++i) buf.push_back(static_cast<char>(p.support[i]));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("dataset_write: cannot open " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("dataset_write: short write to " + path);
    return pairs.size();
}

inline std::vector<ChannelPair> dataset_read(const std::string& path, int expected_n = 0) {
    const std::string data = detail::slurp(path, "dataset_read");
    detail::Cursor c{data, 0, "dataset_read"};
    c.need(4);
    if (data.compare(0, 4, "CPD1") != 0)
        throw std::runtime_error("dataset_read: bad magic at byte offset 0");
    c.pos = 4;
    const int n = static_cast<int>(c.u32());
    const int s = static_cast<int>(c.u32());
    const std::uint64_t count = c.u64();
    if (expected_n != 0 && n != expected_n)
        throw std::runtime_error("dataset_read: N mismatch at byte offset 4 (file has " +
                                 std::to_string(n) + ")");

    std::vector<ChannelPair> pairs;
    pairs.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) {
        ChannelPair p;
        p.downlink_angular.resize(n);
        p.uplink_spatial.resize(n);
        p.support.resize(n);
        p.sparsity = s;
        for (int i = 0; i < n; ++i) {
            const double re = c.f32();
            const double im = c.f32();
            p.downlink_angular[i] = {re, im};
        }
        for (int i = 0; i < n; ++i) {
            const double re = c.f32();
            const double im = c.f32();
            p.uplink_spatial[i] = {re, im};
        }
        for (int i = 0; i < n; ++i) p.support[i] = c.byte();
        p.uplink_angular = to_angular(p.uplink_spatial);
        pairs.push_back(std::move(p));
    }
    return pairs;
}

}  // namespace superfeed

#endif
