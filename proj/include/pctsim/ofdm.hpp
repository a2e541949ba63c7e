#ifndef PCTSIM_OFDM_HPP
#define PCTSIM_OFDM_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pctsim/fft.hpp"
#include "pctsim/rng.hpp"
#include "pctsim/waveform.hpp"

namespace pctsim {

enum class Role : std::uint8_t { data, pilot, guard };

/// Fixed pilot symbol, both polarizations.
inline const cplx kPilotSymbol{0.70710678118654752440, 0.70710678118654752440};

/**
 * @brief OFDM dimensioning: FFT size, active band, pilots, cyclic prefix.
 *
 * Active subcarriers (data + pilots) sit centered around DC; guard bands
 * split symmetrically at the edges. Pilots are spread across the active
 * span at roughly 1/8, 3/8, 5/8, 7/8.
 */
struct OfdmConfig {
    std::size_t fft_size = 0;
    std::size_t data_subcarrier_count = 0;
    std::vector<std::size_t> pilot_list_positions;  // offsets into the active list
    double cp_fraction = 0.0;
    double baud_rate_hz = 0.0;
    std::size_t training_symbol_period = 50;  // payload symbols per training block

    std::size_t active_count() const { return data_subcarrier_count + pilot_list_positions.size(); }
    std::size_t cp_samples() const {
        return static_cast<std::size_t>(std::llround(cp_fraction * static_cast<double>(fft_size)));
    }
    std::size_t symbol_samples() const { return fft_size + cp_samples(); }

    void validate() const {
        if (!Fft::is_pow2(fft_size)) throw std::invalid_argument("ofdm.fft_size: must be a power of two");
        if (active_count() > fft_size)
            throw std::invalid_argument("ofdm.data_subcarrier_count: active band exceeds fft_size");
        if (cp_fraction < 0.0) throw std::invalid_argument("ofdm.cp_fraction: must be >= 0");
        if (baud_rate_hz <= 0.0) throw std::invalid_argument("ofdm.baud_rate_hz: must be > 0");
    }
};

inline OfdmConfig make_ofdm_config(std::size_t fft_size, std::size_t n_data, std::size_t n_pilots,
                                   double cp_fraction, double baud_rate_hz) {
    OfdmConfig cfg;
    cfg.fft_size = fft_size;
    cfg.data_subcarrier_count = n_data;
    cfg.cp_fraction = cp_fraction;
    cfg.baud_rate_hz = baud_rate_hz;
    const std::size_t active = n_data + n_pilots;
    cfg.pilot_list_positions.resize(n_pilots);
    for (std::size_t i = 0; i < n_pilots; ++i)
        cfg.pilot_list_positions[i] = active * (2 * i + 1) / (2 * n_pilots);
    cfg.validate();
    return cfg;
}

/**
 * @brief Per-bin role map plus ordered bin lists for one OFDM layout.
 *
 * data_bins/pilot_bins are FFT-bin indices ordered by ascending logical
 * frequency; payload symbols fill data_bins in that order.
 */
struct SubcarrierLayout {
    std::size_t fft_size = 0;
    std::vector<Role> roles;               // per FFT bin
    std::vector<std::size_t> active_bins;  // ascending logical frequency
    std::vector<std::size_t> data_bins;
    std::vector<std::size_t> pilot_bins;
};

inline SubcarrierLayout make_layout(const OfdmConfig& cfg) {
    cfg.validate();
    SubcarrierLayout lay;
    lay.fft_size = cfg.fft_size;
    lay.roles.assign(cfg.fft_size, Role::guard);
    const long long active = static_cast<long long>(cfg.active_count());
    const long long n = static_cast<long long>(cfg.fft_size);
    const long long first = -active / 2;  // centered band, DC active
    std::vector<bool> is_pilot(active, false);
    for (std::size_t p : cfg.pilot_list_positions) is_pilot.at(p) = true;
    for (long long i = 0; i < active; ++i) {
        const long long m = first + i;
        const std::size_t bin = static_cast<std::size_t>((m % n + n) % n);
        lay.active_bins.push_back(bin);
        if (is_pilot[static_cast<std::size_t>(i)]) {
            lay.roles[bin] = Role::pilot;
            lay.pilot_bins.push_back(bin);
        } else {
            lay.roles[bin] = Role::data;
            lay.data_bins.push_back(bin);
        }
    }
    return lay;
}

/// Per-subcarrier complex symbols for one OFDM symbol, two polarizations,
/// in FFT-bin order. Guard bins stay exactly zero.
struct OfdmSymbolGrid {
    std::vector<cplx> x;
    std::vector<cplx> y;

    OfdmSymbolGrid() = default;
    explicit OfdmSymbolGrid(std::size_t fft_size) : x(fft_size), y(fft_size) {}
    std::size_t size() const { return x.size(); }
};

// ---------------------------------------------------------------------------
// QPSK mapping
// ---------------------------------------------------------------------------

/// Gray QPSK, unit average power: 00 -> (+1+j)/sqrt2, 01 -> (-1+j)/sqrt2,
/// 11 -> (-1-j)/sqrt2, 10 -> (+1-j)/sqrt2.
inline cplx qpsk_point(int b_first, int b_second) {
    constexpr double s = 0.70710678118654752440;
    return cplx(b_second ? -s : s, b_first ? -s : s);
}

inline std::vector<cplx> qpsk_map(const std::vector<int>& bits) {
    if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_map: odd bit count");
    std::vector<cplx> out(bits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = qpsk_point(bits[2 * i], bits[2 * i + 1]);
    return out;
}

/// Nearest-quadrant hard decision; axis ties resolve toward the positive
/// half-plane.
inline void qpsk_demap_symbol(cplx s, int& b_first, int& b_second) {
    b_second = s.real() < 0.0 ? 1 : 0;
    b_first = s.imag() < 0.0 ? 1 : 0;
}

inline std::vector<int> qpsk_demap(const std::vector<cplx>& symbols) {
    std::vector<int> bits(symbols.size() * 2);
    for (std::size_t i = 0; i < symbols.size(); ++i)
        qpsk_demap_symbol(symbols[i], bits[2 * i], bits[2 * i + 1]);
    return bits;
}

// ---------------------------------------------------------------------------
// Modulation
// ---------------------------------------------------------------------------

/// One OFDM symbol including CP. Inverse transform with 1/sqrt(N) scaling;
/// output sample rate equals the baud rate (one sample per subcarrier chip).
inline DualPolWaveform ofdm_modulate(const OfdmSymbolGrid& grid, const OfdmConfig& cfg) {
    if (grid.size() != cfg.fft_size) throw std::invalid_argument("ofdm_modulate: grid/config size mismatch");
    const std::size_t n = cfg.fft_size;
    const std::size_t cp = cfg.cp_samples();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    DualPolWaveform w(n + cp, cfg.baud_rate_hz);
    std::vector<cplx> buf;
    for (int pol = 0; pol < 2; ++pol) {
        buf = pol == 0 ? grid.x : grid.y;
        Fft::inverse(buf);
        auto& rail = pol == 0 ? w.x : w.y;
        for (std::size_t i = 0; i < n; ++i) rail[cp + i] = buf[i] * scale;
        for (std::size_t i = 0; i < cp; ++i) rail[i] = buf[n - cp + i] * scale;
    }
    return w;
}

/// Inverse of ofdm_modulate for one symbol-aligned waveform slice.
inline OfdmSymbolGrid ofdm_demodulate(const DualPolWaveform& w, const OfdmConfig& cfg) {
    const std::size_t n = cfg.fft_size;
    const std::size_t cp = cfg.cp_samples();
    if (w.size() != n + cp) throw std::invalid_argument("ofdm_demodulate: waveform length mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    OfdmSymbolGrid grid(n);
    std::vector<cplx> buf(n);
    for (int pol = 0; pol < 2; ++pol) {
        const auto& rail = pol == 0 ? w.x : w.y;
        std::copy(rail.begin() + static_cast<std::ptrdiff_t>(cp), rail.end(), buf.begin());
        Fft::forward(buf);
        auto& out = pol == 0 ? grid.x : grid.y;
        for (std::size_t i = 0; i < n; ++i) out[i] = buf[i] * scale;
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Framing
// ---------------------------------------------------------------------------

/**
 * @brief Frame structure: training symbols followed by payload symbols.
 *
 * Training symbols are time-interleaved across polarizations (symbol i
 * excites only polarization i mod 2) so the 2x2 channel is identifiable
 * from two consecutive training symbols.
 */
struct FrameLayout {
    std::size_t n_training = 2;
    std::size_t n_payload = 0;
    std::vector<OfdmSymbolGrid> training;

    std::size_t frame_symbols() const { return n_training + n_payload; }
};

inline FrameLayout make_frame_layout(const OfdmConfig& cfg, const SubcarrierLayout& lay,
                                     std::size_t n_training, std::size_t n_payload) {
    FrameLayout fl;
    fl.n_training = n_training;
    fl.n_payload = n_payload;
    // Known QPSK training pattern from a fixed, layout-independent seed.
    Substream pattern(detail::fnv1a64("training-pattern"));
    for (std::size_t t = 0; t < n_training; ++t) {
        OfdmSymbolGrid g(cfg.fft_size);
        auto& rail = (t % 2 == 0) ? g.x : g.y;
        for (std::size_t bin : lay.active_bins) rail[bin] = qpsk_point(pattern.bit(), pattern.bit());
        fl.training.push_back(std::move(g));
    }
    return fl;
}

/// [training | payload] symbols, each CP-extended, concatenated in time.
inline DualPolWaveform build_frame(const std::vector<OfdmSymbolGrid>& payload, const FrameLayout& layout,
                                   const OfdmConfig& cfg) {
    if (payload.size() != layout.n_payload)
        throw std::invalid_argument("build_frame: payload count does not match layout");
    DualPolWaveform w(cfg.symbol_samples() * layout.frame_symbols(), cfg.baud_rate_hz);
    std::size_t off = 0;
    auto append = [&](const OfdmSymbolGrid& g) {
        DualPolWaveform s = ofdm_modulate(g, cfg);
        std::copy(s.x.begin(), s.x.end(), w.x.begin() + static_cast<std::ptrdiff_t>(off));
        std::copy(s.y.begin(), s.y.end(), w.y.begin() + static_cast<std::ptrdiff_t>(off));
        off += s.size();
    };
    for (const auto& ts : layout.training) append(ts);
    for (const auto& g : payload) append(g);
    return w;
}

struct ParsedFrame {
    std::vector<OfdmSymbolGrid> training;
    std::vector<OfdmSymbolGrid> payload;
};

/// Inverse of build_frame on a symbol-aligned frame waveform.
inline ParsedFrame parse_frame(const DualPolWaveform& w, const FrameLayout& layout, const OfdmConfig& cfg) {
    const std::size_t sym = cfg.symbol_samples();
    if (w.size() != sym * layout.frame_symbols())
        throw std::invalid_argument("parse_frame: waveform length mismatch");
    ParsedFrame out;
    DualPolWaveform slice(sym, w.sample_rate_hz, w.center_frequency_hz);
    for (std::size_t s = 0; s < layout.frame_symbols(); ++s) {
        const std::size_t off = s * sym;
        std::copy_n(w.x.begin() + static_cast<std::ptrdiff_t>(off), sym, slice.x.begin());
        std::copy_n(w.y.begin() + static_cast<std::ptrdiff_t>(off), sym, slice.y.begin());
        auto grid = ofdm_demodulate(slice, cfg);
        if (s < layout.n_training)
            out.training.push_back(std::move(grid));
        else
            out.payload.push_back(std::move(grid));
    }
    return out;
}

/// Aggregate bit rate over the active band (data + pilot subcarriers) at
/// the coded bits-per-subcarrier of the dual-polarization symbol.
inline double net_bit_rate_bps(const OfdmConfig& cfg, double bits_per_subcarrier, std::size_t n_bands) {
    const double symbol_rate = cfg.baud_rate_hz / static_cast<double>(cfg.symbol_samples());
    return static_cast<double>(n_bands) * static_cast<double>(cfg.active_count()) * bits_per_subcarrier *
           symbol_rate;
}

}  // namespace pctsim

#endif
