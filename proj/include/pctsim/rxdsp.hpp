#ifndef PCTSIM_RXDSP_HPP
#define PCTSIM_RXDSP_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pctsim/constants.hpp"
#include "pctsim/fft.hpp"
#include "pctsim/jones.hpp"
#include "pctsim/ofdm.hpp"
#include "pctsim/waveform.hpp"

namespace pctsim {

// ---------------------------------------------------------------------------
// Electronic dispersion compensation (overlap-and-save)
// ---------------------------------------------------------------------------

/// Two-sided impulse spread (samples) of the CD transfer for a total
/// accumulated dispersion over a grid of rate fs.
inline double dispersion_spread_samples(double total_ps_nm, double fs) {
    const double beta2_l = std::abs(beta2_from_dispersion(total_ps_nm)) * 1000.0;  // s^2 from ps/nm
    return 2.0 * kPi * beta2_l * fs * fs;
}

struct EdcConfig {
    std::size_t block_size = 0;    // FFT block, power of two
    std::size_t overlap = 0;       // total discarded samples per block (split both sides)
    std::size_t taper_margin = 256;  // raised-cosine taper width inside the overlap
    double total_dispersion_ps_nm = 0.0;

    /// Overlap covering the dispersion spread plus taper margin; block size
    /// the smallest power of two >= 4x the overlap.
    static EdcConfig design(double total_ps_nm, double fs) {
        EdcConfig cfg;
        cfg.total_dispersion_ps_nm = total_ps_nm;
        const double spread = dispersion_spread_samples(total_ps_nm, fs);
        cfg.overlap = 2 * (static_cast<std::size_t>(std::ceil(spread / 2.0)) + cfg.taper_margin);
        cfg.block_size = std::max<std::size_t>(Fft::next_pow2(4 * cfg.overlap), 64);
        return cfg;
    }

    void validate(double fs) const {
        if (!Fft::is_pow2(block_size)) throw std::invalid_argument("edc: block_size must be a power of two");
        if (block_size <= overlap) throw std::invalid_argument("edc: block_size must exceed overlap");
        if (static_cast<double>(overlap) < dispersion_spread_samples(total_dispersion_ps_nm, fs))
            throw std::invalid_argument("edc: overlap smaller than the dispersion-induced impulse spread");
    }
};

/**
 * @brief Block-wise frequency-domain CD compensation (overlap-and-save).
 *
 * The block filter is the ideal inverse H^{-1}(w) = e^{-j (beta2/2) w^2 L}
 * turned into an FIR response confined to the overlap window (raised-cosine
 * taper over the outer margin). Each block then realizes an exact
 * convolution with that response, so the result matches a whole-signal
 * equalizer to the window's in-band ripple. Blocks gather circularly,
 * matching the circular propagation grid; output length = input length.
 */
inline DualPolWaveform edc_overlap_save(const DualPolWaveform& w, const EdcConfig& cfg) {
    w.check();
    cfg.validate(w.sample_rate_hz);
    if (cfg.total_dispersion_ps_nm == 0.0) return w;

    const std::size_t n = w.size();
    const std::size_t block = cfg.block_size;
    const std::size_t half_ov = cfg.overlap / 2;
    const std::size_t valid = block - 2 * half_ov;

    // Ideal inverse on the block grid, windowed to +-overlap/2 in time.
    const double beta2_l = beta2_from_dispersion(cfg.total_dispersion_ps_nm) * 1000.0;
    std::vector<cplx> inv(block);
    for (std::size_t k = 0; k < block; ++k) {
        const double omega = 2.0 * kPi * Fft::bin_frequency(k, block, w.sample_rate_hz);
        inv[k] = std::polar(1.0 / static_cast<double>(block), -0.5 * beta2_l * omega * omega);
    }
    Fft::inverse(inv);  // impulse response (already 1/block-scaled)
    const double edge = static_cast<double>(half_ov);
    const double margin = static_cast<double>(std::min<std::size_t>(cfg.taper_margin, half_ov));
    for (std::size_t t = 0; t < block; ++t) {
        const double signed_t = t <= block / 2 ? static_cast<double>(t)
                                               : static_cast<double>(t) - static_cast<double>(block);
        const double at = std::abs(signed_t);
        double win = 0.0;
        if (at <= edge - margin)
            win = 1.0;
        else if (at <= edge)
            win = 0.5 - 0.5 * std::cos(kPi * (edge - at) / margin);
        inv[t] *= win;
    }
    Fft::forward(inv);

    DualPolWaveform out(n, w.sample_rate_hz, w.center_frequency_hz);
    std::vector<cplx> buf(block);
    const double scale = 1.0 / static_cast<double>(block);
    for (int pol = 0; pol < 2; ++pol) {
        const auto& in_rail = pol == 0 ? w.x : w.y;
        auto& out_rail = pol == 0 ? out.x : out.y;
        for (std::size_t start = 0; start < n; start += valid) {
            for (std::size_t t = 0; t < block; ++t) {
                const long long src = static_cast<long long>(start) + static_cast<long long>(t) -
                                      static_cast<long long>(half_ov);
                const std::size_t idx =
                    static_cast<std::size_t>(((src % static_cast<long long>(n)) +
                                              static_cast<long long>(n)) %
                                             static_cast<long long>(n));
                buf[t] = in_rail[idx];
            }
            Fft::forward(buf);
            for (std::size_t k = 0; k < block; ++k) buf[k] *= inv[k] * scale;
            Fft::inverse(buf);
            const std::size_t m = std::min(valid, n - start);
            for (std::size_t t = 0; t < m; ++t) out_rail[start + t] = buf[half_ov + t];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Channel estimation and equalization
// ---------------------------------------------------------------------------

/**
 * @brief Per-active-subcarrier 2x2 channel estimate from time-interleaved
 * training symbols.
 */
struct ChannelEstimate {
    std::vector<std::size_t> bins;    // active bins the estimate covers
    std::vector<JonesMatrix> h;       // one per entry of bins
    std::vector<double> noise_metric; // residual power per bin across repeats
};

/**
 * Least-squares channel estimate. rx_training holds received training
 * grids in transmit order; layout.training holds the known pattern
 * (symbol i excites only polarization i mod 2). Repetitions beyond one
 * x/y pair are averaged. isfa_halfwidth > 0 additionally averages the
 * per-subcarrier estimates over +-halfwidth neighbors in the active band
 * (intra-symbol frequency-domain averaging); the bulk CD is gone after
 * the dispersion compensation stage, so H varies slowly across the band.
 */
inline ChannelEstimate estimate_channel(const std::vector<OfdmSymbolGrid>& rx_training,
                                        const FrameLayout& layout, const SubcarrierLayout& lay,
                                        std::size_t isfa_halfwidth = 0) {
    if (rx_training.size() < 2 || layout.training.size() < 2)
        throw std::invalid_argument("estimate_channel: need at least one x/y training pair");
    if (rx_training.size() > layout.training.size())
        throw std::invalid_argument("estimate_channel: more received training symbols than the layout has");

    ChannelEstimate est;
    est.bins = lay.active_bins;
    est.h.assign(est.bins.size(), JonesMatrix{{0, 0}, {0, 0}, {0, 0}, {0, 0}});
    est.noise_metric.assign(est.bins.size(), 0.0);

    std::size_t n_x = 0, n_y = 0;
    for (std::size_t t = 0; t < rx_training.size(); ++t) {
        const bool excites_x = (t % 2 == 0);
        (excites_x ? n_x : n_y)++;
        for (std::size_t i = 0; i < est.bins.size(); ++i) {
            const std::size_t bin = est.bins[i];
            const cplx ref = excites_x ? layout.training[t].x[bin] : layout.training[t].y[bin];
            if (std::norm(ref) == 0.0)
                throw std::invalid_argument("estimate_channel: zero training energy on an active subcarrier");
            const cplx cx = rx_training[t].x[bin] / ref;
            const cplx cy = rx_training[t].y[bin] / ref;
            if (excites_x) {
                est.h[i].a += cx;
                est.h[i].c += cy;
            } else {
                est.h[i].b += cx;
                est.h[i].d += cy;
            }
        }
    }
    if (n_x == 0 || n_y == 0)
        throw std::invalid_argument("estimate_channel: both polarizations must be excited");
    for (auto& m : est.h) {
        m.a /= static_cast<double>(n_x);
        m.c /= static_cast<double>(n_x);
        m.b /= static_cast<double>(n_y);
        m.d /= static_cast<double>(n_y);
    }

    if (isfa_halfwidth > 0) {
        const auto raw = est.h;
        const long long n = static_cast<long long>(raw.size());
        const long long hw = static_cast<long long>(isfa_halfwidth);
        for (long long i = 0; i < n; ++i) {
            const long long lo = std::max<long long>(0, i - hw);
            const long long hi = std::min<long long>(n - 1, i + hw);
            JonesMatrix acc{{0, 0}, {0, 0}, {0, 0}, {0, 0}};
            for (long long k = lo; k <= hi; ++k) {
                acc.a += raw[static_cast<std::size_t>(k)].a;
                acc.b += raw[static_cast<std::size_t>(k)].b;
                acc.c += raw[static_cast<std::size_t>(k)].c;
                acc.d += raw[static_cast<std::size_t>(k)].d;
            }
            const double inv = 1.0 / static_cast<double>(hi - lo + 1);
            est.h[static_cast<std::size_t>(i)] = {acc.a * inv, acc.b * inv, acc.c * inv, acc.d * inv};
        }
    }
    return est;
}

/// Zero-forcing equalization, H_k^{-1} per active subcarrier. Subcarriers
/// whose estimate is numerically singular (condition number > 1e8) are
/// zeroed; the return value counts them.
inline std::size_t equalize(OfdmSymbolGrid& grid, const ChannelEstimate& est) {
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < est.bins.size(); ++i) {
        const std::size_t bin = est.bins[i];
        const JonesMatrix& m = est.h[i];
        const auto [smax, smin] = singular_values(m);
        if (!(smin > 0.0) || smax / smin > 1e8) {
            grid.x[bin] = 0.0;
            grid.y[bin] = 0.0;
            ++flagged;
            continue;
        }
        const cplx det = m.a * m.d - m.b * m.c;
        const cplx x = grid.x[bin], y = grid.y[bin];
        grid.x[bin] = (m.d * x - m.b * y) / det;
        grid.y[bin] = (m.a * y - m.c * x) / det;
    }
    return flagged;
}

/// Pilot-based common phase error correction, per polarization: rotate by
/// the conjugate of the average pilot rotation.
inline void cpe_correct(OfdmSymbolGrid& grid, const SubcarrierLayout& lay) {
    for (int pol = 0; pol < 2; ++pol) {
        auto& rail = pol == 0 ? grid.x : grid.y;
        cplx acc{0.0, 0.0};
        for (std::size_t bin : lay.pilot_bins) acc += rail[bin] * std::conj(kPilotSymbol);
        if (std::norm(acc) == 0.0) throw std::invalid_argument("cpe_correct: zero pilot power");
        const cplx derot = std::polar(1.0, -std::arg(acc));
        for (std::size_t bin : lay.active_bins) rail[bin] *= derot;
    }
}

}  // namespace pctsim

#endif
