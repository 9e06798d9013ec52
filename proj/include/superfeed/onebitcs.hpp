#ifndef SUPERFEED_ONEBITCS_HPP
#define SUPERFEED_ONEBITCS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "superfeed/chanrecip.hpp"
#include "superfeed/rng.hpp"

namespace superfeed {

// Gaussian measurement matrix, entries ~ N(0, 1/M). Encoder and decoder
// regenerate it from the shared seed.
struct MeasurementMatrix {
    Eigen::MatrixXd entries;  // N x M
    int n = 0;
    int m = 0;
    std::uint64_t seed = 0;

    static MeasurementMatrix make(int n, int m, std::uint64_t seed) {
        if (n < 1 || m < 1) throw std::invalid_argument("MeasurementMatrix: bad dims");
        MeasurementMatrix phi;
        phi.n = n;
        phi.m = m;
        phi.seed = seed;
        phi.entries.resize(n, m);
        auto rng = make_stream(seed, 0x504849ULL);  // "PHI"
        const double sd = 1.0 / std::sqrt(static_cast<double>(m));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) phi.entries(i, j) = sd * randn(rng);
        return phi;
    }

    double compression_rate() const { return static_cast<double>(m) / n; }
};

// w = [z | p_real | p_imag], all bits in {0,1}, length K = N + 2M.
struct FeedbackVector {
    std::vector<std::uint8_t> support;  // length N
    std::vector<std::uint8_t> p_real;   // length M
    std::vector<std::uint8_t> p_imag;   // length M

    int n() const { return static_cast<int>(support.size()); }
    int m() const { return static_cast<int>(p_real.size()); }
    int k_total() const { return n() + 2 * m(); }
};

// sign() per the feedback encoding: 1 for positive, 0 otherwise.
inline std::uint8_t sign_bit(double x) { return x > 0.0 ? 1 : 0; }

inline FeedbackVector quantize(const cvec& h, const MeasurementMatrix& phi,
                               const std::vector<std::uint8_t>& support) {
    if (static_cast<int>(h.size()) != phi.n || static_cast<int>(support.size()) != phi.n)
        throw std::invalid_argument("quantize: dimension mismatch");
    const rvec meas_re = phi.entries.transpose() * h.real();
    const rvec meas_im = phi.entries.transpose() * h.imag();
    FeedbackVector fv;
    fv.support = support;
    fv.p_real.resize(phi.m);
    fv.p_imag.resize(phi.m);
    for (int i = 0; i < phi.m; ++i) {
        fv.p_real[i] = sign_bit(meas_re[i]);
        fv.p_imag[i] = sign_bit(meas_im[i]);
    }
    return fv;
}

inline FeedbackVector assemble_fv(std::vector<std::uint8_t> z, std::vector<std::uint8_t> p_real,
                                  std::vector<std::uint8_t> p_imag) {
    if (p_real.size() != p_imag.size())
        throw std::invalid_argument("assemble_fv: p_real/p_imag length mismatch");
    FeedbackVector fv;
    fv.support = std::move(z);
    fv.p_real = std::move(p_real);
    fv.p_imag = std::move(p_imag);
    return fv;
}

inline std::vector<std::uint8_t> fv_to_bits(const FeedbackVector& fv) {
    std::vector<std::uint8_t> w;
    w.reserve(fv.k_total());
    w.insert(w.end(), fv.support.begin(), fv.support.end());
    w.insert(w.end(), fv.p_real.begin(), fv.p_real.end());
    w.insert(w.end(), fv.p_imag.begin(), fv.p_imag.end());
    return w;
}

inline FeedbackVector fv_from_bits(const std::vector<std::uint8_t>& w, int n, int m) {
    if (static_cast<int>(w.size()) != n + 2 * m)
        throw std::invalid_argument("fv_from_bits: length inconsistency");
    FeedbackVector fv;
    fv.support.assign(w.begin(), w.begin() + n);
    fv.p_real.assign(w.begin() + n, w.begin() + n + m);
    fv.p_imag.assign(w.begin() + n + m, w.end());
    return fv;
}

struct ReconstructionResult {
    rvec amplitude;          // nonnegative, unit norm, zero off-support
    rvec angle;              // in (-pi, pi]
    int iterations_used = 0;
    long long flops = 0;
};

namespace detail {

// two-valued sign used inside the iterations, sgn(0) = +1
inline double sgn_pm(double x) { return x < 0.0 ? -1.0 : 1.0; }

inline ReconstructionResult finish_reconstruction(const rvec& a_re, const rvec& a_im,
                                                  int iterations, long long flops) {
    const double norm = std::sqrt(a_re.squaredNorm() + a_im.squaredNorm());
    if (norm == 0.0) throw std::runtime_error("degenerate reconstruction");
    ReconstructionResult res;
    const int n = static_cast<int>(a_re.size());
    res.amplitude.resize(n);
    res.angle.resize(n);
    for (int i = 0; i < n; ++i) {
        const double re = a_re[i] / norm, im = a_im[i] / norm;
        res.amplitude[i] = std::hypot(re, im);
        res.angle[i] = (re == 0.0 && im == 0.0) ? 0.0 : std::atan2(im, re);
    }
    res.iterations_used = iterations;
    res.flops = flops;
    return res;
}

}  // namespace detail

// Support-aided BIHT: back-projection init, sign-consistency gradient steps
// projected onto the known support, single unit normalization at the end.
// Real and imaginary parts run through the same real measurement matrix, so
// one iteration costs the canonical 4MN multiplies.
inline ReconstructionResult sca_biht(const FeedbackVector& fv, const MeasurementMatrix& phi,
                                     int iterations, double step = 1.0) {
    if (fv.n() != phi.n || fv.m() != phi.m)
        throw std::invalid_argument("sca_biht: dimension mismatch");
    if (iterations < 0) throw std::invalid_argument("sca_biht: negative iteration count");

    const int n = phi.n, m = phi.m;
    rvec b_re(m), b_im(m);
    for (int i = 0; i < m; ++i) {
        b_re[i] = 2.0 * fv.p_real[i] - 1.0;
        b_im[i] = 2.0 * fv.p_imag[i] - 1.0;
    }

    rvec mask(n);
    bool any = false;
    for (int i = 0; i < n; ++i) {
        mask[i] = fv.support[i] ? 1.0 : 0.0;
        any = any || fv.support[i];
    }
    if (!any) throw std::runtime_error("empty support");

    rvec a_re = (phi.entries * b_re).cwiseProduct(mask);
    rvec a_im = (phi.entries * b_im).cwiseProduct(mask);
    long long flops = 0;
    for (int t = 0; t < iterations; ++t) {
        const rvec meas_re = phi.entries.transpose() * a_re;
        const rvec meas_im = phi.entries.transpose() * a_im;
        rvec err_re(m), err_im(m);
        for (int i = 0; i < m; ++i) {
            err_re[i] = b_re[i] - detail::sgn_pm(meas_re[i]);
            err_im[i] = b_im[i] - detail::sgn_pm(meas_im[i]);
        }
        a_re += (step / 2.0) * (phi.entries * err_re).cwiseProduct(mask);
        a_im += (step / 2.0) * (phi.entries * err_im).cwiseProduct(mask);
        flops += 4LL * m * n;
    }
    return detail::finish_reconstruction(a_re, a_im, iterations, flops);
}

// BIHT with plain top-S hard thresholding, no support side information.
// Stands in for the TDM 1-bit CS baseline; per-iteration cost 4(M+1)N.
inline ReconstructionResult biht_top_s(const FeedbackVector& fv, const MeasurementMatrix& phi,
                                       int sparsity, int iterations, double step = 1.0) {
    if (fv.m() != phi.m) throw std::invalid_argument("biht_top_s: dimension mismatch");
    if (sparsity < 1 || sparsity > phi.n) throw std::invalid_argument("biht_top_s: bad sparsity");

    const int n = phi.n, m = phi.m;
    rvec b_re(m), b_im(m);
    for (int i = 0; i < m; ++i) {
        b_re[i] = 2.0 * fv.p_real[i] - 1.0;
        b_im[i] = 2.0 * fv.p_imag[i] - 1.0;
    }

    auto top_s = [&](rvec& re, rvec& im) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) {
            return std::hypot(re[x], im[x]) > std::hypot(re[y], im[y]);
        });
        for (int i = sparsity; i < n; ++i) {
            re[idx[i]] = 0.0;
            im[idx[i]] = 0.0;
        }
    };

    rvec a_re = phi.entries * b_re;
    rvec a_im = phi.entries * b_im;
    top_s(a_re, a_im);
    long long flops = 0;
    for (int t = 0; t < iterations; ++t) {
        const rvec meas_re = phi.entries.transpose() * a_re;
        const rvec meas_im = phi.entries.transpose() * a_im;
        rvec err_re(m), err_im(m);
        for (int i = 0; i < m; ++i) {
            err_re[i] = b_re[i] - detail::sgn_pm(meas_re[i]);
            err_im[i] = b_im[i] - detail::sgn_pm(meas_im[i]);
        }
        a_re += (step / 2.0) * (phi.entries * err_re);
        a_im += (step / 2.0) * (phi.entries * err_im);
        top_s(a_re, a_im);
        flops += 4LL * (m + 1) * n;
    }
    return detail::finish_reconstruction(a_re, a_im, iterations, flops);
}

// Number of measurement signs an estimate reproduces; used by tests and
// diagnostics to gauge sign consistency.
inline int sign_consistency(const cvec& est, const MeasurementMatrix& phi,
                            const FeedbackVector& fv) {
    const rvec meas_re = phi.entries.transpose() * est.real();
    const rvec meas_im = phi.entries.transpose() * est.imag();
    int count = 0;
    for (int i = 0; i < phi.m; ++i) {
        if ((meas_re[i] > 0.0) == (fv.p_real[i] != 0)) ++count;
        if ((meas_im[i] > 0.0) == (fv.p_imag[i] != 0)) ++count;
    }
    return count;
}

}  // namespace superfeed

#endif
