#ifndef PCTSIM_WAVEFORM_HPP
#define PCTSIM_WAVEFORM_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pctsim/constants.hpp"

namespace pctsim {

/**
 * @brief Complex baseband samples for the two polarizations.
 *
 * Sample values are field amplitudes in sqrt(W); instantaneous power is
 * |x|^2 + |y|^2. Both rails always have equal length.
 */
struct DualPolWaveform {
    std::vector<cplx> x;
    std::vector<cplx> y;
    double sample_rate_hz = 0.0;
    double center_frequency_hz = kDefaultCarrierHz;

    DualPolWaveform() = default;
    DualPolWaveform(std::size_t n, double fs, double carrier = kDefaultCarrierHz)
        : x(n), y(n), sample_rate_hz(fs), center_frequency_hz(carrier) {}

    std::size_t size() const { return x.size(); }

    void check() const {
        if (x.size() != y.size()) throw std::invalid_argument("waveform: rails differ in length");
        if (x.empty()) throw std::invalid_argument("waveform: empty");
        if (sample_rate_hz <= 0.0) throw std::invalid_argument("waveform: sample_rate must be > 0");
    }
};

/// Mean over samples of |x|^2 + |y|^2, in watts.
inline double waveform_power(const DualPolWaveform& w) {
    w.check();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += std::norm(w.x[i]) + std::norm(w.y[i]);
    return acc / static_cast<double>(w.size());
}

/// Sum over samples of |x|^2 + |y|^2 (energy up to the 1/fs factor).
inline double waveform_sample_energy(const DualPolWaveform& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += std::norm(w.x[i]) + std::norm(w.y[i]);
    return acc;
}

inline void scale_waveform(DualPolWaveform& w, double gain) {
    for (auto& v : w.x) v *= gain;
    for (auto& v : w.y) v *= gain;
}

}  // namespace pctsim

#endif
