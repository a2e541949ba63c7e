#include <catch_amalgamated.hpp>

#include <cmath>

#include "pctsim/link.hpp"
#include "pctsim/ofdm.hpp"

using namespace pctsim;

namespace {

/// Band-limited random waveform occupying |f| < occupancy * fs/2.
DualPolWaveform bandlimited_noise(std::size_t n, double fs, double occupancy, std::uint64_t seed) {
    SeededRng rng(seed);
    Substream s = rng.stream("bits");
    DualPolWaveform w(n, fs);
    for (auto* rail : {&w.x, &w.y}) {
        std::vector<cplx>& r = *rail;
        for (std::size_t k = 0; k < n; ++k) {
            if (std::abs(Fft::bin_frequency(k, n, fs)) < 0.5 * occupancy * fs)
                r[k] = std::polar(1.0, s.uniform_range(0.0, 2.0 * kPi));
        }
        Fft::inverse(r);
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : r) v *= scale;
    }
    return w;
}

double max_field_error(const DualPolWaveform& a, const DualPolWaveform& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.x[i] - b.x[i]));
        m = std::max(m, std::abs(a.y[i] - b.y[i]));
    }
    return m;
}

double rms_field(const DualPolWaveform& a) {
    return std::sqrt(waveform_power(a));
}

}  // namespace

TEST_CASE("resampling: tone preservation and round trip") {
    const std::size_t n = 1024;
    DualPolWaveform w(n, 32e9);
    for (std::size_t i = 0; i < n; ++i) {
        w.x[i] = std::polar(1.0, 2.0 * kPi * 37.0 * static_cast<double>(i) / n);
        w.y[i] = std::polar(0.5, -2.0 * kPi * 11.0 * static_cast<double>(i) / n);
    }
    const auto up = upsample2(w);
    REQUIRE(up.size() == 2 * n);
    REQUIRE(up.sample_rate_hz == 64e9);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(up.x[2 * i] - w.x[i]) < 1e-12);

    const auto back = downsample2(up);
    REQUIRE(back.size() == n);
    REQUIRE(max_field_error(back, w) < 1e-12);
}

TEST_CASE("ssfm: impairment-free span is the identity") {
    auto w = bandlimited_noise(4096, 64e9, 0.4, 1);
    const auto ref = w;
    SpanParams p;
    p.dispersion_ps_nm_km = 0.0;
    p.attenuation_db_per_km = 0.0;
    p.nonlinear_coeff_per_w_km = 0.0;
    fiber_span_ssfm(w, p, 1.0, 0.005);
    REQUIRE(max_field_error(w, ref) < 1e-12);
}

TEST_CASE("ssfm: CD-only span matches the analytic transfer") {
    const double fs = 64e9;
    const std::size_t n = 8192;
    SpanParams p;
    p.length_km = 80.0;
    p.attenuation_db_per_km = 0.0;
    p.nonlinear_coeff_per_w_km = 0.0;
    p.dispersion_ps_nm_km = 16.0;

    // Independent oracle: e^{+j (beta2/2) w^2 L} computed directly here.
    auto oracle = [&](const DualPolWaveform& in) {
        const double lambda = 1550e-9;
        const double beta2 = -16e-6 * lambda * lambda / (2.0 * kPi * 299792458.0);  // s^2/m
        DualPolWaveform out = in;
        for (auto* rail : {&out.x, &out.y}) {
            Fft::forward(*rail);
            for (std::size_t k = 0; k < n; ++k) {
                const double omega = 2.0 * kPi * Fft::bin_frequency(k, n, fs);
                (*rail)[k] *= std::polar(1.0 / static_cast<double>(n),
                                         0.5 * beta2 * omega * omega * 80e3);
            }
            Fft::inverse(*rail);
        }
        return out;
    };

    auto w = bandlimited_noise(n, fs, 0.4, 2);
    const auto expect = oracle(w);

    auto single = w;
    fiber_span_ssfm(single, p, 1.0, 0.005);  // gamma = 0: single exact step
    REQUIRE(max_field_error(single, expect) < 1e-8);

    auto stepped = w;
    SpanParams p_eps = p;
    p_eps.nonlinear_coeff_per_w_km = 1e-12;  // negligible Kerr, forces stepping
    fiber_span_ssfm(stepped, p_eps, 1.0, 0.005);
    REQUIRE(max_field_error(stepped, expect) < 1e-8);
}

TEST_CASE("ssfm: CW self-phase-modulation closed form") {
    const double power_w = 0.5e-3;
    const std::size_t n = 1024;
    DualPolWaveform w(n, 64e9);
    for (auto& v : w.x) v = std::sqrt(power_w);

    SpanParams p;
    p.length_km = 80.0;
    p.attenuation_db_per_km = 0.2;
    p.dispersion_ps_nm_km = 0.0;
    p.nonlinear_coeff_per_w_km = 1.22;
    fiber_span_ssfm(w, p, 1.0, 0.005);

    const double a = 0.2 * std::log(10.0) / 10.0;
    const double l_eff = (1.0 - std::exp(-a * 80.0)) / a;
    const double phi_expect = (8.0 / 9.0) * 1.22 * power_w * l_eff;  // ~0.0115 rad
    REQUIRE(phi_expect == Catch::Approx(0.0115).margin(2e-4));

    const double amp_expect = std::sqrt(power_w) * std::pow(10.0, -0.2 * 80.0 / 20.0);
    for (const auto& v : w.x) {
        REQUIRE(std::arg(v) == Catch::Approx(phi_expect).epsilon(1e-6));
        REQUIRE(std::abs(v) == Catch::Approx(amp_expect).epsilon(1e-9));
    }
}

TEST_CASE("ssfm: rejects an undersampled signal") {
    // One sample per chip: OFDM band occupies ~80% of the grid.
    const auto cfg = make_ofdm_config(256, 200, 4, 0.03, 32e9);
    const auto lay = make_layout(cfg);
    SeededRng rng(3);
    Substream s = rng.stream("bits");
    OfdmSymbolGrid g(cfg.fft_size);
    for (std::size_t bin : lay.active_bins) g.x[bin] = qpsk_point(s.bit(), s.bit());
    auto w = ofdm_modulate(g, cfg);
    w.x.resize(256);
    w.y.resize(256);  // symbol body only, power-of-two grid
    SpanParams p;
    REQUIRE_THROWS_AS(fiber_span_ssfm(w, p, 1.0, 0.005), std::invalid_argument);
}

TEST_CASE("ssfm: halving the nonlinear phase cap is converged") {
    auto w = bandlimited_noise(16384, 64e9, 0.4, 9);
    scale_waveform(w, std::sqrt(dbm_to_watt(-3.0) / waveform_power(w)));
    SpanParams p;  // 80 km, 0.2 dB/km, D 16, gamma 1.22
    auto coarse = w, fine = w;
    for (int span = 0; span < 2; ++span) {
        fiber_span_ssfm(coarse, p, 2.5, 0.02);
        fiber_span_ssfm(fine, p, 2.5, 0.01);
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        diff += std::norm(coarse.x[i] - fine.x[i]) + std::norm(coarse.y[i] - fine.y[i]);
    diff = std::sqrt(diff / static_cast<double>(w.size()));
    REQUIRE(diff / rms_field(fine) < 1e-3);
}

TEST_CASE("edfa: gain, zero input, ASE density") {
    SeededRng rng(21);
    Substream ase = rng.stream("ase");

    DualPolWaveform w(256, 64e9);
    for (auto& v : w.x) v = cplx(1e-3, 0.0);  // 1 uW in x
    edfa_amplify(w, 16.0, 5.5, ase, false);
    REQUIRE(waveform_power(w) == Catch::Approx(39.81e-6).epsilon(1e-3));

    DualPolWaveform z(256, 64e9);
    edfa_amplify(z, 16.0, 5.5, ase, false);
    REQUIRE(waveform_power(z) == 0.0);

    // Per-polarization ASE power over the grid bandwidth matches
    // S_ase * fs within 5%.
    const std::size_t n = 1 << 19;
    DualPolWaveform big(n, 64e9, 193.41e12);
    edfa_amplify(big, 16.0, 5.5, ase, true);
    double px = 0.0, py = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        px += std::norm(big.x[i]);
        py += std::norm(big.y[i]);
    }
    px /= static_cast<double>(n);
    py /= static_cast<double>(n);
    const double s_ase = ase_psd_per_pol(16.0, 5.5, 193.41e12);
    // Frozen from the formula: n_sp = 10^0.55*G/(2(G-1)), S = n_sp h nu (G-1).
    REQUIRE(s_ase == Catch::Approx(9.052e-18).epsilon(1e-3));
    REQUIRE(px == Catch::Approx(s_ase * 64e9).epsilon(0.05));
    REQUIRE(py == Catch::Approx(s_ase * 64e9).epsilon(0.05));
}

TEST_CASE("phase noise: identity at zero linewidth, Wiener increments") {
    SeededRng rng(31);

    DualPolWaveform w = bandlimited_noise(1024, 64e9, 0.3, 5);
    const auto ref = w;
    Substream pn0 = rng.stream("phase-noise");
    apply_phase_noise(w, 0.0, pn0);
    REQUIRE(max_field_error(w, ref) == 0.0);

    const std::size_t n = 1 << 20;
    DualPolWaveform cw(n, 64e9);
    for (std::size_t i = 0; i < n; ++i) {
        cw.x[i] = cplx(1.0, 0.0);
        cw.y[i] = cplx(0.5, 0.5);
    }
    Substream pn = rng.stream("phase-noise", 1);
    apply_phase_noise(cw, 100e3, pn);

    // Common multiplicative phase: x/y ratio untouched.
    for (std::size_t i = 0; i < 64; ++i)
        REQUIRE(std::abs(cw.y[i] / cw.x[i] - cplx(0.5, 0.5)) < 1e-12);

    std::vector<double> inc(n - 1);
    double mean = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double d = std::arg(cw.x[i + 1] / cw.x[i]);
        inc[i] = d;
        mean += d;
    }
    mean /= static_cast<double>(n - 1);
    double var = 0.0, m3 = 0.0, m4 = 0.0;
    for (double d : inc) {
        const double c = d - mean;
        var += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    var /= static_cast<double>(n - 1);
    m3 /= static_cast<double>(n - 1);
    m4 /= static_cast<double>(n - 1);
    REQUIRE(var == Catch::Approx(9.817e-6).epsilon(0.01));
    // Normality of increments: skewness and excess kurtosis near zero.
    const double skew = m3 / std::pow(var, 1.5);
    const double exkurt = m4 / (var * var) - 3.0;
    REQUIRE(std::abs(skew) < 5.0 * std::sqrt(6.0 / static_cast<double>(n)));
    REQUIRE(std::abs(exkurt) < 5.0 * std::sqrt(24.0 / static_cast<double>(n)));
}

TEST_CASE("pmd: unitary at zero dgd, exact dgd split for one section") {
    SeededRng rng(41);

    DualPolWaveform w = bandlimited_noise(2048, 64e9, 0.3, 7);
    const double e_in = waveform_sample_energy(w);
    Substream pmd0 = rng.stream("pmd");
    apply_pmd_section(w, 0.0, pmd0);
    REQUIRE(waveform_sample_energy(w) == Catch::Approx(e_in).epsilon(1e-12));

    // Probe the section's Jones matrix with impulse inputs on x and y,
    // using cloned substream states so both probes see the same draw.
    const std::size_t n = 4096;
    const double fs = 64e9;
    const double dgd_ps = 20.0;
    Substream pmd = rng.stream("pmd", 1);
    Substream pmd_copy = pmd;

    DualPolWaveform ex(n, fs), ey(n, fs);
    ex.x[0] = 1.0;
    ey.y[0] = 1.0;
    apply_pmd_section(ex, dgd_ps, pmd);
    apply_pmd_section(ey, dgd_ps, pmd_copy);

    auto jones_at = [&](std::size_t bin) {
        std::vector<cplx> xx = ex.x, xy = ex.y, yx = ey.x, yy = ey.y;
        Fft::forward(xx);
        Fft::forward(xy);
        Fft::forward(yx);
        Fft::forward(yy);
        return JonesMatrix{xx[bin], yx[bin], xy[bin], yy[bin]};
    };
    const std::size_t b1 = 10, b2 = 20;
    const double dw = 2.0 * kPi * (Fft::bin_frequency(b2, n, fs) - Fft::bin_frequency(b1, n, fs));
    const JonesMatrix j1 = jones_at(b1), j2 = jones_at(b2);
    // M = J(w2) J(w1)^{-1}; DGD = |arg l1 - arg l2| / dw.
    const cplx det = j1.a * j1.d - j1.b * j1.c;
    const JonesMatrix j1inv{j1.d / det, -j1.b / det, -j1.c / det, j1.a / det};
    const JonesMatrix m = j2 * j1inv;
    const cplx tr = m.a + m.d;
    const cplx dd = m.a * m.d - m.b * m.c;
    const cplx disc = std::sqrt(tr * tr - 4.0 * dd);
    const cplx l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
    const double dgd_est = std::abs(std::arg(l1 / l2)) / dw;
    REQUIRE(dgd_est == Catch::Approx(dgd_ps * 1e-12).epsilon(1e-6));
}

TEST_CASE("pmd: waveplate sizing reproduces the configured mean DGD") {
    // 500 draws of a 40-section link; mean total DGD within 10% of 20 ps.
    SeededRng rng(51);
    Substream s = rng.stream("pmd");
    const std::size_t sections = 40;
    const double tau = pmd_section_dgd_ps(20.0, sections) * 1e-12;
    const double w1 = 0.0, w2 = 2.0 * kPi * 1e9;

    double mean_dgd = 0.0;
    const int draws = 500;
    for (int d = 0; d < draws; ++d) {
        JonesMatrix j1 = JonesMatrix::identity(), j2 = JonesMatrix::identity();
        for (std::size_t k = 0; k < sections; ++k) {
            const JonesMatrix u = random_sop_controller(s);
            auto dl = [&](double w) {
                return JonesMatrix::diag(std::polar(1.0, w * tau / 2.0),
                                         std::polar(1.0, -w * tau / 2.0));
            };
            j1 = dl(w1) * u * j1;
            j2 = dl(w2) * u * j2;
        }
        const cplx det = j1.a * j1.d - j1.b * j1.c;
        const JonesMatrix j1inv{j1.d / det, -j1.b / det, -j1.c / det, j1.a / det};
        const JonesMatrix m = j2 * j1inv;
        const cplx tr = m.a + m.d;
        const cplx dd = m.a * m.d - m.b * m.c;
        const cplx disc = std::sqrt(tr * tr - 4.0 * dd);
        const cplx l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
        mean_dgd += std::abs(std::arg(l1 / l2)) / (w2 - w1);
    }
    mean_dgd /= draws;
    REQUIRE(mean_dgd == Catch::Approx(20e-12).epsilon(0.10));
}

TEST_CASE("superchannel mux/demux") {
    // Single band: mux is the identity.
    auto one = bandlimited_noise(2048, 128e9, 0.1, 11);
    const auto muxed1 = mux_superchannel({one}, 37.5e9, 15e9);
    REQUIRE(max_field_error(muxed1, one) < 1e-12);

    // Two bands at bin-aligned spacing: recover each with tiny EVM.
    const std::size_t n = 4096;
    const double fs = 128e9;
    const double spacing = fs / n * 1200;  // exactly 1200 bins
    auto b0 = bandlimited_noise(n, fs, 0.2, 12);
    auto b1 = bandlimited_noise(n, fs, 0.2, 13);
    const auto muxed = mux_superchannel({b0, b1}, spacing, 0.15 * fs);

    const double p0 = waveform_power(b0), p1 = waveform_power(b1);
    REQUIRE(waveform_power(muxed) == Catch::Approx(p0 + p1).epsilon(1e-9));

    const auto r0 = demux_select(muxed, 0, 2, spacing, spacing / 2.0);
    const auto r1 = demux_select(muxed, 1, 2, spacing, spacing / 2.0);
    double evm0 = 0.0, evm1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        evm0 += std::norm(r0.x[i] - b0.x[i]) + std::norm(r0.y[i] - b0.y[i]);
        evm1 += std::norm(r1.x[i] - b1.x[i]) + std::norm(r1.y[i] - b1.y[i]);
    }
    REQUIRE(std::sqrt(evm0 / (p0 * n)) < 1e-6);
    REQUIRE(std::sqrt(evm1 / (p1 * n)) < 1e-6);

    REQUIRE_THROWS_AS(mux_superchannel({b0, b1}, 100e9, 40e9), std::invalid_argument);
}

namespace {

LinkConfig basic_link(std::size_t n_spans, std::size_t n_sections, double rho_db, PdlModel model,
                      double theta = 0.0) {
    LinkConfig cfg;
    cfg.spans.assign(n_spans, SpanParams{});
    cfg.pdl_sections.assign(n_sections, PdlSection{rho_db, theta, model});
    cfg.edfa_gain_db = 16.0;
    return cfg;
}

}  // namespace

TEST_CASE("link_propagate: degenerate and balance cases") {
    SeededRng rng(61);

    // Zero spans, zero sections: identity.
    auto w = bandlimited_noise(2048, 64e9, 0.3, 21);
    LinkConfig empty;
    empty.spans.clear();
    empty.edfa_gain_db = 16.0;  // no spans -> unused
    const auto out = link_propagate(w, empty, rng, 0);
    REQUIRE(max_field_error(out, w) == 0.0);

    // Attenuation + gain only: output power equals input power.
    LinkConfig ag = basic_link(4, 0, 0.0, PdlModel::aligned);
    for (auto& s : ag.spans) {
        s.dispersion_ps_nm_km = 0.0;
        s.nonlinear_coeff_per_w_km = 0.0;
    }
    ag.ase_on = false;
    const auto bal = link_propagate(w, ag, rng, 0);
    REQUIRE(waveform_power(bal) == Catch::Approx(waveform_power(w)).epsilon(1e-9));

    // Everything lossless/unitary conserves energy (dispersion + rotations).
    LinkConfig cons = basic_link(2, 2, 0.0, PdlModel::statistical);
    for (auto& s : cons.spans) {
        s.attenuation_db_per_km = 0.0;
        s.nonlinear_coeff_per_w_km = 0.0;
    }
    cons.edfa_gain_db = 0.0;
    cons.ase_on = false;
    const auto kept = link_propagate(w, cons, rng, 3);
    REQUIRE(waveform_sample_energy(kept) ==
            Catch::Approx(waveform_sample_energy(w)).epsilon(1e-9));
}

TEST_CASE("link_propagate: aligned theta=0 acts diagonally") {
    SeededRng rng(71);
    LinkConfig cfg = basic_link(4, 2, 1.8, PdlModel::aligned, 0.0);
    for (auto& s : cfg.spans) s.nonlinear_coeff_per_w_km = 0.0;
    cfg.ase_on = false;

    auto wx = bandlimited_noise(2048, 64e9, 0.3, 31);
    for (auto& v : wx.y) v = 0.0;
    const auto ox = link_propagate(wx, cfg, rng, 0);
    double y_energy = 0.0;
    for (const auto& v : ox.y) y_energy += std::norm(v);
    REQUIRE(y_energy == 0.0);
    REQUIRE(waveform_power(ox) == Catch::Approx(waveform_power(wx)).epsilon(1e-9));

    auto wy = bandlimited_noise(2048, 64e9, 0.3, 32);
    for (auto& v : wy.x) v = 0.0;
    const auto oy = link_propagate(wy, cfg, rng, 0);
    const double alpha_pow = std::pow(10.0, -2.0 * 1.8 / 10.0);  // two sections
    REQUIRE(waveform_power(oy) == Catch::Approx(waveform_power(wy) * alpha_pow).epsilon(1e-9));
}

TEST_CASE("link telemetry and statistical cumulated PDL") {
    SeededRng rng(81);
    LinkConfig cfg = basic_link(2, 2, 1.6, PdlModel::statistical);
    for (auto& s : cfg.spans) s.nonlinear_coeff_per_w_km = 0.0;
    cfg.ase_on = false;

    auto w = bandlimited_noise(1024, 64e9, 0.3, 41);
    LinkTelemetry tel;
    link_propagate(w, cfg, rng, 7, &tel);
    REQUIRE(tel.section_theta_rad.size() == 2);
    REQUIRE(tel.section_sop.size() == 2);
    REQUIRE(tel.span_launch_dbm.size() == 2);
    REQUIRE(tel.lumped_cumulated_pdl_db > 0.0);

    // rms cumulated PDL of 5 x 1.6 dB statistical sections ~ 1.6*sqrt(5).
    LinkConfig five = basic_link(5, 5, 1.6, PdlModel::statistical);
    double acc = 0.0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        const auto sections = draw_lumped_sections(five, rng, static_cast<std::uint64_t>(t));
        const double r = cumulated_pdl_db(composed_lumped_jones(sections));
        acc += r * r;
    }
    const double rms = std::sqrt(acc / trials);
    REQUIRE(rms == Catch::Approx(3.578).margin(0.25));
}

TEST_CASE("link validation reports field paths") {
    LinkConfig cfg = basic_link(5, 2, 1.0, PdlModel::aligned);
    const auto errors = cfg.validate();
    REQUIRE_FALSE(errors.empty());
    bool found = false;
    for (const auto& e : errors) found |= e.find("pdl_sections") != std::string::npos;
    REQUIRE(found);

    LinkConfig bad_gain = basic_link(4, 0, 0.0, PdlModel::aligned);
    bad_gain.edfa_gain_db = 10.0;  // span loss is 16 dB
    REQUIRE_FALSE(bad_gain.validate().empty());
}
