#ifndef PCTSIM_LINK_HPP
#define PCTSIM_LINK_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pctsim/constants.hpp"
#include "pctsim/fft.hpp"
#include "pctsim/jones.hpp"
#include "pctsim/rng.hpp"
#include "pctsim/waveform.hpp"

namespace pctsim {

/// Dual-polarization Kerr model. manakov: polarization-averaged
/// (8/9) gamma ||E||^2 E, exactly U(2)-equivariant, so lumped polarization
/// elements cannot disturb conjugate-twin correlations once equalized.
/// cnlse_scattered: per-rail coupled nonlinearity gamma (|u|^2 + 2/3 |v|^2)
/// with a random waveplate rotation per nonlinear step; its average is the
/// Manakov model, but lumped PDL/crosstalk now interacts with the
/// basis-dependent Kerr terms the way it does in a birefringent fiber.
enum class NlPolModel { manakov, cnlse_scattered };

struct SpanParams {
    double length_km = 80.0;
    double attenuation_db_per_km = 0.2;
    double dispersion_ps_nm_km = 16.0;
    double nonlinear_coeff_per_w_km = 1.22;
    double pmd_mean_dgd_ps = 0.0;  // 0 disables PMD

    void validate(std::vector<std::string>& errors, const std::string& path) const {
        if (length_km <= 0.0) errors.push_back(path + ".length_km: must be > 0");
        if (attenuation_db_per_km < 0.0) errors.push_back(path + ".attenuation_db_per_km: must be >= 0");
        if (nonlinear_coeff_per_w_km < 0.0)
            errors.push_back(path + ".nonlinear_coeff_per_w_km: must be >= 0");
        if (pmd_mean_dgd_ps < 0.0) errors.push_back(path + ".pmd_mean_dgd_ps: must be >= 0");
    }
};

/// aligned: theta fixed for the whole run; statistical: theta redrawn
/// uniformly on [0,2pi) each trial, held fixed within the trial.
enum class PdlModel { aligned, statistical };

struct PdlSection {
    double rho_db = 0.0;
    double theta_rad = 0.0;  // used by the aligned model
    PdlModel model = PdlModel::aligned;
};

struct LinkConfig {
    std::vector<SpanParams> spans;
    std::vector<PdlSection> pdl_sections;
    double edfa_gain_db = 16.0;
    double edfa_nf_db = 5.5;
    double laser_linewidth_hz = 100e3;
    double launch_power_dbm = -3.0;
    std::size_t n_subbands = 1;
    double subband_spacing_hz = 37.5e9;
    double ssfm_max_step_km = 1.0;
    double ssfm_max_nl_phase_rad = 0.005;
    double predispersion_fraction = 0.0;  // 0.5 gives the symmetric dispersion map
    NlPolModel nl_pol_model = NlPolModel::manakov;
    bool ase_on = true;

    std::size_t spans_per_section() const {
        return pdl_sections.empty() ? spans.size() : spans.size() / pdl_sections.size();
    }

    double total_dispersion_ps_nm() const {
        double acc = 0.0;
        for (const auto& s : spans) acc += s.dispersion_ps_nm_km * s.length_km;
        return acc;
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        for (std::size_t i = 0; i < spans.size(); ++i)
            spans[i].validate(errors, "link.spans[" + std::to_string(i) + "]");
        if (!pdl_sections.empty() && spans.size() % pdl_sections.size() != 0)
            errors.push_back("link.pdl_sections: section count must divide the span count evenly");
        for (std::size_t i = 0; i < pdl_sections.size(); ++i)
            if (pdl_sections[i].rho_db < 0.0)
                errors.push_back("link.pdl_sections[" + std::to_string(i) + "].rho_db: must be >= 0");
        if (!spans.empty()) {
            const double span_loss = spans.front().attenuation_db_per_km * spans.front().length_km;
            if (std::abs(edfa_gain_db - span_loss) > 1e-9)
                errors.push_back("link.edfa_gain_db: must compensate the span loss of " +
                                 std::to_string(span_loss) + " dB");
        }
        if (edfa_nf_db < 0.0) errors.push_back("link.edfa_nf_db: must be >= 0");
        if (laser_linewidth_hz < 0.0) errors.push_back("link.laser_linewidth_hz: must be >= 0");
        if (n_subbands < 1) errors.push_back("link.n_subbands: must be >= 1");
        if (subband_spacing_hz <= 0.0 && n_subbands > 1)
            errors.push_back("link.subband_spacing_hz: must be > 0");
        if (ssfm_max_step_km <= 0.0) errors.push_back("link.ssfm_max_step_km: must be > 0");
        if (ssfm_max_nl_phase_rad <= 0.0) errors.push_back("link.ssfm_max_nl_phase_rad: must be > 0");
        if (predispersion_fraction < 0.0 || predispersion_fraction > 1.0)
            errors.push_back("link.predispersion_fraction: must be in [0,1]");
        return errors;
    }
};

// ---------------------------------------------------------------------------
// Grid utilities
// ---------------------------------------------------------------------------

/// Zero-pad to the next power of two (or to min_len if larger).
inline DualPolWaveform pad_to_pow2(const DualPolWaveform& w, std::size_t min_len = 0) {
    const std::size_t n = Fft::next_pow2(std::max(w.size(), min_len));
    DualPolWaveform out(n, w.sample_rate_hz, w.center_frequency_hz);
    std::copy(w.x.begin(), w.x.end(), out.x.begin());
    std::copy(w.y.begin(), w.y.end(), out.y.begin());
    return out;
}

namespace link_detail {

inline void resample_rail(std::vector<cplx>& rail, std::size_t n_out) {
    const std::size_t n_in = rail.size();
    Fft::forward(rail);
    std::vector<cplx> out(n_out);
    const std::size_t keep = std::min(n_in, n_out);
    for (std::size_t k = 0; k < keep / 2; ++k) out[k] = rail[k];
    for (std::size_t k = 0; k < keep / 2; ++k) out[n_out - 1 - k] = rail[n_in - 1 - k];
    Fft::inverse(out);
    const double scale = 1.0 / static_cast<double>(n_in);
    for (auto& v : out) v *= scale;
    rail = std::move(out);
}

}  // namespace link_detail

/// Ideal 2x band-limited upsampling on a power-of-two grid.
inline DualPolWaveform upsample2(const DualPolWaveform& w) {
    if (!Fft::is_pow2(w.size())) throw std::invalid_argument("upsample2: length must be a power of two");
    DualPolWaveform out = w;
    link_detail::resample_rail(out.x, 2 * w.size());
    link_detail::resample_rail(out.y, 2 * w.size());
    out.sample_rate_hz = 2.0 * w.sample_rate_hz;
    return out;
}

/// Brick-wall 2x decimation (keeps the central half of the spectrum).
inline DualPolWaveform downsample2(const DualPolWaveform& w) {
    if (!Fft::is_pow2(w.size()) || w.size() < 2)
        throw std::invalid_argument("downsample2: length must be a power of two");
    DualPolWaveform out = w;
    link_detail::resample_rail(out.x, w.size() / 2);
    link_detail::resample_rail(out.y, w.size() / 2);
    out.sample_rate_hz = 0.5 * w.sample_rate_hz;
    return out;
}

/// Apply the chromatic-dispersion transfer e^{+j (beta2/2) w^2 L} of an
/// accumulated dispersion given in ps/nm. Negative values invert.
inline void apply_dispersion_transfer(DualPolWaveform& w, double accumulated_ps_nm) {
    if (accumulated_ps_nm == 0.0) return;
    const std::size_t n = w.size();
    // D*L in ps/nm equals (ps/nm/km) * km, so beta2*L = beta2_per_m * 1000 m.
    const double beta2_l = beta2_from_dispersion(accumulated_ps_nm) * 1000.0;
    std::vector<cplx> factor(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double omega = 2.0 * kPi * Fft::bin_frequency(k, n, w.sample_rate_hz);
        factor[k] = std::polar(1.0, 0.5 * beta2_l * omega * omega);
    }
    for (auto* rail : {&w.x, &w.y}) {
        Fft::forward(*rail);
        for (std::size_t k = 0; k < n; ++k) (*rail)[k] *= factor[k];
        Fft::inverse(*rail);
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : *rail) v *= scale;
    }
}

// ---------------------------------------------------------------------------
// Split-step fiber propagation
// ---------------------------------------------------------------------------

namespace link_detail {

/// e^{j phi} accurate to ~1e-13 for |phi| <= 0.1, exact sincos otherwise.
inline cplx unit_phasor(double phi) {
    const double p2 = phi * phi;
    if (p2 <= 0.01) {
        const double c = 1.0 - p2 * (0.5 - p2 * (1.0 / 24.0 - p2 / 720.0));
        const double s = phi * (1.0 - p2 * (1.0 / 6.0 - p2 * (1.0 / 120.0 - p2 / 5040.0)));
        return {c, s};
    }
    return {std::cos(phi), std::sin(phi)};
}

inline double peak_power(const DualPolWaveform& w) {
    double p = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        p = std::max(p, std::norm(w.x[i]) + std::norm(w.y[i]));
    return p;
}

/// CD phase factors for one step of h_km on the given grid.
inline std::vector<cplx> cd_factor(std::size_t n, double fs, double beta2_s2_per_m, double h_km) {
    std::vector<cplx> f(n);
    const double c = 0.5 * beta2_s2_per_m * h_km * 1000.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double omega = 2.0 * kPi * Fft::bin_frequency(k, n, fs);
        f[k] = std::polar(1.0, c * omega * omega);
    }
    return f;
}

}  // namespace link_detail

/**
 * @brief One fiber span via the symmetric split-step Fourier method.
 *
 * Linear step: chromatic dispersion in the frequency domain (beta2 from D
 * at 1550 nm). Nonlinear step: Kerr rotation per NlPolModel, with loss
 * folded in exactly through the local effective length, so a CW field
 * accrues (8/9) gamma P L_eff end to end in Manakov mode. Step sizes adapt
 * to min(max_step, step keeping the peak nonlinear phase below
 * max_nl_phase), quantized to power-of-two fractions of max_step so
 * dispersion factors can be reused.
 *
 * In cnlse_scattered mode a random waveplate is applied before each
 * nonlinear step (drawn from `scattering`) and the product of those
 * rotations is
 * accumulated into `rotation_out`, so a downstream polarization controller
 * can re-align the frame.
 */
inline void fiber_span_ssfm(DualPolWaveform& w, const SpanParams& p, double max_step_km,
                            double max_nl_phase_rad, NlPolModel model = NlPolModel::manakov,
                            Substream* scattering = nullptr, JonesMatrix* rotation_out = nullptr) {
    w.check();
    const std::size_t n = w.size();
    const double fs = w.sample_rate_hz;
    const double beta2 = beta2_from_dispersion(p.dispersion_ps_nm_km);
    const bool coupled = model == NlPolModel::cnlse_scattered;
    const double gamma_self = coupled ? p.nonlinear_coeff_per_w_km
                                      : (8.0 / 9.0) * p.nonlinear_coeff_per_w_km;
    const double cross_ratio = coupled ? 2.0 / 3.0 : 1.0;
    const double loss_np_per_km = p.attenuation_db_per_km * std::log(10.0) / 10.0;  // power
    const double span_km = p.length_km;

    // Sample-rate margin check: with a >= 2x oversampled signal the outer
    // half of the grid carries only the noise floor, so its mean spectral
    // density sits far below the band core. An undersampled signal parks
    // comparable density there. (Accumulated ASE is white and must not
    // trigger this, hence densities rather than energies.)
    {
        std::vector<cplx> spec = w.x;
        Fft::forward(spec);
        std::vector<cplx> spec_y = w.y;
        Fft::forward(spec_y);
        double outer = 0.0, inner = 0.0;
        std::size_t n_outer = 0, n_inner = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double e = std::norm(spec[k]) + std::norm(spec_y[k]);
            const double af = std::abs(Fft::bin_frequency(k, n, fs));
            if (af > 0.25 * fs) {
                outer += e;
                ++n_outer;
            } else if (af <= 0.125 * fs) {
                inner += e;
                ++n_inner;
            }
        }
        const double outer_psd = n_outer ? outer / static_cast<double>(n_outer) : 0.0;
        const double inner_psd = n_inner ? inner / static_cast<double>(n_inner) : 0.0;
        if (outer_psd > 0.5 * inner_psd)
            throw std::invalid_argument("fiber_span_ssfm: insufficient sample-rate margin");
    }

    // Pure linear span in Manakov mode: single exact frequency-domain step.
    // (The scattered model keeps stepping so its rotations still occur.)
    if (gamma_self == 0.0 && !coupled) {
        apply_dispersion_transfer(w, p.dispersion_ps_nm_km * span_km);
        const double a = std::pow(10.0, -p.attenuation_db_per_km * span_km / 20.0);
        scale_waveform(w, a);
        return;
    }

    auto pick_step = [&](double remaining) {
        double h = max_step_km;
        const double pk = link_detail::peak_power(w);
        if (pk > 0.0 && gamma_self > 0.0) h = std::min(h, max_nl_phase_rad / (gamma_self * pk));
        // Quantize down to max_step / 2^k (k <= 8) so dispersion factors
        // can be reused across steps.
        double q = max_step_km;
        for (int k = 0; k < 8 && q > h; ++k) q *= 0.5;
        if (q <= h) h = q;
        return std::min(h, remaining);
    };

    std::map<long long, std::vector<cplx>> cd_cache;  // keyed by step length in um
    auto cd_apply = [&](double h_km) {
        if (h_km <= 0.0) return;
        const long long key = std::llround(h_km * 1e6);
        auto it = cd_cache.find(key);
        if (it == cd_cache.end())
            it = cd_cache.emplace(key, link_detail::cd_factor(n, fs, beta2, h_km)).first;
        const auto& f = it->second;
        const double scale = 1.0 / static_cast<double>(n);
        for (auto* rail : {&w.x, &w.y}) {
            Fft::forward(*rail);
            for (std::size_t k = 0; k < n; ++k) (*rail)[k] *= f[k] * scale;
            Fft::inverse(*rail);
        }
    };

    double done = 0.0;
    double h = pick_step(span_km);
    cd_apply(0.5 * h);
    while (true) {
        if (coupled && scattering) {
            const JonesMatrix u = random_sop_controller(*scattering);
            apply_jones(w, u);
            if (rotation_out) *rotation_out = u * (*rotation_out);
        }
        // Nonlinear rotation over [done, done+h] with loss folded in.
        const double l_eff =
            loss_np_per_km > 0.0 ? (1.0 - std::exp(-loss_np_per_km * h)) / loss_np_per_km : h;
        const double field_loss = std::exp(-0.5 * loss_np_per_km * h);
        if (coupled) {
            for (std::size_t i = 0; i < n; ++i) {
                const double px = std::norm(w.x[i]);
                const double py = std::norm(w.y[i]);
                w.x[i] *= link_detail::unit_phasor(gamma_self * (px + cross_ratio * py) * l_eff) *
                          field_loss;
                w.y[i] *= link_detail::unit_phasor(gamma_self * (py + cross_ratio * px) * l_eff) *
                          field_loss;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double power = std::norm(w.x[i]) + std::norm(w.y[i]);
                const cplx rot = link_detail::unit_phasor(gamma_self * power * l_eff) * field_loss;
                w.x[i] *= rot;
                w.y[i] *= rot;
            }
        }
        done += h;
        if (done >= span_km - 1e-12) {
            cd_apply(0.5 * h);
            break;
        }
        const double h_next = pick_step(span_km - done);
        cd_apply(0.5 * (h + h_next));
        h = h_next;
    }
}

// ---------------------------------------------------------------------------
// Amplification, phase noise, PMD
// ---------------------------------------------------------------------------

/// ASE power spectral density per polarization (W/Hz) of an EDFA.
inline double ase_psd_per_pol(double gain_db, double nf_db, double carrier_hz) {
    const double g = db_to_linear(gain_db);
    if (g <= 1.0) return 0.0;
    const double n_sp = db_to_linear(nf_db) * g / (2.0 * (g - 1.0));
    return n_sp * kPlanck * carrier_hz * (g - 1.0);
}

/// Flat-gain EDFA: field scaled by 10^(gain/20); optionally adds circular
/// complex Gaussian ASE per polarization with per-sample variance
/// S_ase * sample_rate.
inline void edfa_amplify(DualPolWaveform& w, double gain_db, double nf_db, Substream& rng,
                         bool noise_on) {
    const double gf = std::pow(10.0, gain_db / 20.0);
    scale_waveform(w, gf);
    if (!noise_on) return;
    const double var = ase_psd_per_pol(gain_db, nf_db, w.center_frequency_hz) * w.sample_rate_hz;
    if (var <= 0.0) return;
    const double sigma = std::sqrt(var);
    for (auto& v : w.x) v += sigma * rng.complex_normal();
    for (auto& v : w.y) v += sigma * rng.complex_normal();
}

/// Multiplicative Wiener laser phase noise, common to both polarizations;
/// increment variance 2 pi linewidth / sample_rate.
inline void apply_phase_noise(DualPolWaveform& w, double linewidth_hz, Substream& rng) {
    if (linewidth_hz < 0.0) throw std::invalid_argument("apply_phase_noise: negative linewidth");
    if (linewidth_hz == 0.0) return;
    const double sigma = std::sqrt(2.0 * kPi * linewidth_hz / w.sample_rate_hz);
    double phi = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        phi += sigma * rng.normal();
        const cplx r = std::polar(1.0, phi);
        w.x[i] *= r;
        w.y[i] *= r;
    }
}

/// One PMD waveplate: random unitary rotation followed by +-dgd/2
/// differential group delay between the rotated axes.
inline void apply_pmd_section(DualPolWaveform& w, double dgd_ps, Substream& rng) {
    apply_jones(w, random_sop_controller(rng));
    if (dgd_ps == 0.0) return;
    const std::size_t n = w.size();
    const double half_delay_s = 0.5 * dgd_ps * 1e-12;
    Fft::forward(w.x);
    Fft::forward(w.y);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double omega = 2.0 * kPi * Fft::bin_frequency(k, n, w.sample_rate_hz);
        const cplx dp = std::polar(1.0, omega * half_delay_s);
        w.x[k] *= dp * scale;
        w.y[k] *= std::conj(dp) * scale;
    }
    Fft::inverse(w.x);
    Fft::inverse(w.y);
}

/// Waveplate DGD so N concatenated sections average to the configured
/// mean total DGD: tau_section = tau_mean * sqrt(3 pi / 8) / sqrt(N).
inline double pmd_section_dgd_ps(double mean_total_ps, std::size_t n_sections) {
    return mean_total_ps * std::sqrt(3.0 * kPi / 8.0) / std::sqrt(static_cast<double>(n_sections));
}

// ---------------------------------------------------------------------------
// Superchannel mux / demux
// ---------------------------------------------------------------------------

/// Comb offset of band i in an n-band superchannel.
inline double band_offset_hz(std::size_t band, std::size_t n_bands, double spacing_hz) {
    return (static_cast<double>(band) - 0.5 * static_cast<double>(n_bands - 1)) * spacing_hz;
}

inline void frequency_shift(DualPolWaveform& w, double offset_hz) {
    if (offset_hz == 0.0) return;
    const double step = 2.0 * kPi * offset_hz / w.sample_rate_hz;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const cplx r = std::polar(1.0, step * static_cast<double>(i));
        w.x[i] *= r;
        w.y[i] *= r;
    }
}

/// Frequency-shift each band to its comb offset and sum. All bands must
/// share one sample grid wide enough for the comb plus band edges.
inline DualPolWaveform mux_superchannel(const std::vector<DualPolWaveform>& bands, double spacing_hz,
                                        double band_halfwidth_hz) {
    if (bands.empty()) throw std::invalid_argument("mux_superchannel: no bands");
    const std::size_t n = bands.front().size();
    const double fs = bands.front().sample_rate_hz;
    const double extent =
        std::abs(band_offset_hz(0, bands.size(), spacing_hz)) + band_halfwidth_hz;
    if (2.0 * extent > fs)
        throw std::invalid_argument("mux_superchannel: sample grid too narrow (aliasing)");
    DualPolWaveform sum(n, fs, bands.front().center_frequency_hz);
    for (std::size_t b = 0; b < bands.size(); ++b) {
        if (bands[b].size() != n || bands[b].sample_rate_hz != fs)
            throw std::invalid_argument("mux_superchannel: bands must share one sample grid");
        DualPolWaveform shifted = bands[b];
        frequency_shift(shifted, band_offset_hz(b, bands.size(), spacing_hz));
        for (std::size_t i = 0; i < n; ++i) {
            sum.x[i] += shifted.x[i];
            sum.y[i] += shifted.y[i];
        }
    }
    return sum;
}

/// Shift band `band` back to baseband and brick-wall low-pass to its width.
inline DualPolWaveform demux_select(const DualPolWaveform& w, std::size_t band, std::size_t n_bands,
                                    double spacing_hz, double band_halfwidth_hz) {
    DualPolWaveform out = w;
    frequency_shift(out, -band_offset_hz(band, n_bands, spacing_hz));
    const std::size_t n = out.size();
    const double scale = 1.0 / static_cast<double>(n);
    for (auto* rail : {&out.x, &out.y}) {
        Fft::forward(*rail);
        for (std::size_t k = 0; k < n; ++k) {
            const bool pass = std::abs(Fft::bin_frequency(k, n, out.sample_rate_hz)) <= band_halfwidth_hz;
            (*rail)[k] *= pass ? scale : 0.0;
        }
        Fft::inverse(*rail);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lumped PDL emulator and full link
// ---------------------------------------------------------------------------

struct LumpedSection {
    double theta_rad = 0.0;
    PdlModel model = PdlModel::aligned;
    JonesMatrix sop;  // polarization controller ahead of the PDL element
    JonesMatrix pdl;
};

/// Draw the per-run lumped elements: identity controllers and the fixed
/// theta for the aligned model; Haar controllers and fresh uniform theta
/// per section for the statistical model.
inline std::vector<LumpedSection> draw_lumped_sections(const LinkConfig& cfg, const SeededRng& rng,
                                                       std::uint64_t trial) {
    Substream sop = rng.stream("sop", trial);
    Substream angle = rng.stream("pdl-angle", trial);
    std::vector<LumpedSection> out;
    out.reserve(cfg.pdl_sections.size());
    for (const auto& sec : cfg.pdl_sections) {
        LumpedSection s;
        s.model = sec.model;
        if (sec.model == PdlModel::statistical) {
            s.sop = random_sop_controller(sop);
            s.theta_rad = angle.uniform_range(0.0, 2.0 * kPi);
        } else {
            s.sop = JonesMatrix::identity();
            s.theta_rad = sec.theta_rad;
        }
        s.pdl = pdl_jones(s.theta_rad, sec.rho_db);
        out.push_back(s);
    }
    return out;
}

/// Product of the lumped elements in propagation order.
inline JonesMatrix composed_lumped_jones(const std::vector<LumpedSection>& sections) {
    JonesMatrix j = JonesMatrix::identity();
    for (const auto& s : sections) j = (s.pdl * s.sop) * j;
    return j;
}

struct LinkTelemetry {
    std::vector<double> section_theta_rad;
    std::vector<JonesMatrix> section_sop;
    double lumped_cumulated_pdl_db = 0.0;
    std::vector<double> span_launch_dbm;
};

/**
 * @brief Full link: per PDL section, spans_per_section x (SSFM span ->
 * [PMD waveplate] -> EDFA), then polarization controller and PDL element.
 *
 * The controller ahead of each PDL element realizes the model: aligned
 * mode re-aligns the frame (it inverts the fiber rotation accumulated over
 * the loop, so the PDL axes stay at the configured theta to the launched
 * signal); the statistical model scrambles with a Haar draw. With no PDL
 * sections the chain is just the amplified spans.
 */
inline DualPolWaveform link_propagate(const DualPolWaveform& input, const LinkConfig& cfg,
                                      const SeededRng& rng, std::uint64_t trial,
                                      LinkTelemetry* telemetry = nullptr) {
    {
        const auto errors = cfg.validate();
        if (!errors.empty()) throw std::invalid_argument("link_propagate: " + errors.front());
    }
    DualPolWaveform w = input;
    Substream ase = rng.stream("ase", trial);
    Substream pmd = rng.stream("pmd", trial);
    Substream scatter = rng.stream("scattering", trial);
    const auto sections = draw_lumped_sections(cfg, rng, trial);

    const std::size_t n_sections = std::max<std::size_t>(1, sections.size());
    const std::size_t per_loop = sections.empty() ? cfg.spans.size() : cfg.spans_per_section();
    const double pmd_total =
        cfg.spans.empty() ? 0.0 : cfg.spans.front().pmd_mean_dgd_ps;
    const double dgd_section_ps =
        pmd_total > 0.0 ? pmd_section_dgd_ps(pmd_total, cfg.spans.size()) : 0.0;

    JonesMatrix lumped_total = JonesMatrix::identity();
    std::size_t span_idx = 0;
    for (std::size_t loop = 0; loop < n_sections; ++loop) {
        JonesMatrix loop_rotation = JonesMatrix::identity();
        for (std::size_t s = 0; s < per_loop && span_idx < cfg.spans.size(); ++s, ++span_idx) {
            if (telemetry) telemetry->span_launch_dbm.push_back(watt_to_dbm(waveform_power(w)));
            fiber_span_ssfm(w, cfg.spans[span_idx], cfg.ssfm_max_step_km, cfg.ssfm_max_nl_phase_rad,
                            cfg.nl_pol_model, &scatter, &loop_rotation);
            if (cfg.spans[span_idx].pmd_mean_dgd_ps > 0.0)
                apply_pmd_section(w, dgd_section_ps, pmd);
            if (cfg.edfa_gain_db > 0.0)
                edfa_amplify(w, cfg.edfa_gain_db, cfg.edfa_nf_db, ase, cfg.ase_on);
        }
        if (loop < sections.size()) {
            const auto& sec = sections[loop];
            // Aligned model: undo the accumulated fiber rotation so the PDL
            // element sees the launch polarization frame at its fixed theta.
            const JonesMatrix controller = sec.model == PdlModel::aligned
                                               ? loop_rotation.adjoint()
                                               : sec.sop;
            apply_jones(w, controller);
            apply_jones(w, sec.pdl);
            lumped_total = sec.pdl * controller * loop_rotation * lumped_total;
            if (telemetry) {
                telemetry->section_theta_rad.push_back(sec.theta_rad);
                telemetry->section_sop.push_back(controller);
            }
        } else {
            lumped_total = loop_rotation * lumped_total;
        }
    }
    if (telemetry)
        telemetry->lumped_cumulated_pdl_db =
            sections.empty() ? 0.0 : cumulated_pdl_db(lumped_total);
    return w;
}

}  // namespace pctsim

#endif
