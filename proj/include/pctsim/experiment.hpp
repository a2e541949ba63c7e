#ifndef PCTSIM_EXPERIMENT_HPP
#define PCTSIM_EXPERIMENT_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pctsim/codec.hpp"
#include "pctsim/link.hpp"
#include "pctsim/metrics.hpp"
#include "pctsim/ofdm.hpp"
#include "pctsim/rxdsp.hpp"

namespace pctsim {

/// Configuration problems found during validation, with field paths.
struct ConfigError : std::runtime_error {
    std::vector<std::string> details;
    explicit ConfigError(std::vector<std::string> d)
        : std::runtime_error(d.empty() ? "invalid configuration" : d.front()), details(std::move(d)) {}
};

enum class ExperimentKind { single, power_sweep, theta_sweep, pdl_sweep, monte_carlo };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::single: return "single";
        case ExperimentKind::power_sweep: return "power_sweep";
        case ExperimentKind::theta_sweep: return "theta_sweep";
        case ExperimentKind::pdl_sweep: return "pdl_sweep";
        case ExperimentKind::monte_carlo: return "monte_carlo";
    }
    return "?";
}

/**
 * @brief Full parameterization of one experiment run.
 */
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::single;
    CodecMode codec = CodecMode::lpc_pcts;
    std::uint64_t base_seed = 1;
    std::size_t n_trials = 1;
    bool desk_scale = true;
    std::size_t threads = 0;  // 0: hardware concurrency

    OfdmConfig ofdm;
    std::size_t n_training = 2;
    std::size_t n_payload = 50;
    std::size_t n_frames = 9;
    std::size_t isfa_halfwidth = 8;  // channel-estimate frequency averaging

    LinkConfig link;
    std::size_t measured_band = 0;

    std::vector<double> sweep_powers_dbm;
    std::vector<double> sweep_thetas_deg;
    std::vector<double> sweep_pdl_db;
    double q_threshold_db = 5.7;

    std::size_t payload_bits_per_trial(const SubcarrierLayout& lay) const {
        return n_frames * n_payload * payload_bits_per_symbol(lay);
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        try {
            ofdm.validate();
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
        for (const auto& e : link.validate()) errors.push_back(e);
        if (n_trials < 1) errors.push_back("n_trials: must be >= 1");
        if (n_frames < 1) errors.push_back("frame.n_frames: must be >= 1");
        if (n_payload < 1) errors.push_back("frame.n_payload: must be >= 1");
        if (n_training < 2) errors.push_back("frame.n_training: need >= 2 (one per polarization)");
        if (codec == CodecMode::ltc_pcts && n_payload % 2 != 0)
            errors.push_back("frame.n_payload: must be even for ltc_pcts (twin time slots)");
        if (measured_band >= link.n_subbands) errors.push_back("measured_band: out of range");
        if (kind == ExperimentKind::power_sweep && sweep_powers_dbm.empty())
            errors.push_back("sweep.powers_dbm: must be nonempty");
        if (kind == ExperimentKind::theta_sweep) {
            if (sweep_thetas_deg.empty()) errors.push_back("sweep.thetas_deg: must be nonempty");
            for (const auto& s : link.pdl_sections)
                if (s.model != PdlModel::aligned)
                    errors.push_back("link.pdl_sections: theta sweep requires the aligned model");
        }
        if (kind == ExperimentKind::pdl_sweep && sweep_pdl_db.empty())
            errors.push_back("sweep.pdl_db: must be nonempty");
        if (kind == ExperimentKind::monte_carlo)
            for (const auto& s : link.pdl_sections)
                if (s.model != PdlModel::statistical)
                    errors.push_back("link.pdl_sections: monte_carlo requires the statistical model");
        return errors;
    }

    void validate_or_throw() const {
        auto e = validate();
        if (!e.empty()) throw ConfigError(std::move(e));
    }
};

/// Desk-scale preset: minutes-scale runs whose orderings (not absolute Q)
/// carry the conclusions. 10 x 120 km spans keep the ASE level high enough
/// that the optimum-power Q sits in a countable-BER range.
inline ExperimentSpec desk_scale_spec() {
    ExperimentSpec s;
    s.desk_scale = true;
    s.ofdm = make_ofdm_config(256, 200, 4, 0.03, 32e9);
    s.n_training = 2;
    s.n_payload = 50;
    s.n_frames = 9;
    SpanParams span;
    span.length_km = 120.0;
    s.link.spans.assign(10, span);
    s.link.pdl_sections.clear();
    s.link.edfa_gain_db = 24.0;
    s.link.edfa_nf_db = 5.5;
    s.link.laser_linewidth_hz = 100e3;
    s.link.launch_power_dbm = -3.0;
    s.link.n_subbands = 1;
    s.link.ssfm_max_step_km = 2.5;
    s.link.ssfm_max_nl_phase_rad = 0.02;
    // Symmetric dispersion map: the operating point where conjugate-twin
    // cancellation is strongest, so codec orderings are measured where the
    // twin mechanism actually acts.
    s.link.predispersion_fraction = 0.5;
    // Birefringent-fiber Kerr coupling: the polarization-averaged Manakov
    // model is U(2)-equivariant and hides every PDL-codec interaction.
    s.link.nl_pol_model = NlPolModel::cnlse_scattered;
    s.n_trials = 50;
    return s;
}

/// Full-scale preset with the published system parameters: 4 sub-bands at
/// 37.5 GHz, 32 Gbaud, 4096-point FFT with 3300 data subcarriers, 3% CP,
/// 40 x 80 km SSMF spans, 16 dB / 5.5 dB EDFAs, 100 kHz lasers, 5-section
/// PDL emulator at 1.6 dB per section.
inline ExperimentSpec full_scale_spec() {
    ExperimentSpec s;
    s.desk_scale = false;
    s.ofdm = make_ofdm_config(4096, 3300, 4, 0.03, 32e9);
    s.n_training = 2;
    s.n_payload = 50;
    s.n_frames = 10;
    SpanParams span;  // 80 km, 0.2 dB/km, 16 ps/nm/km, 1.22 /(W km)
    s.link.spans.assign(40, span);
    s.link.pdl_sections.assign(5, PdlSection{1.6, 0.0, PdlModel::statistical});
    s.link.edfa_gain_db = 16.0;
    s.link.edfa_nf_db = 5.5;
    s.link.laser_linewidth_hz = 100e3;
    s.link.launch_power_dbm = -3.0;
    s.link.n_subbands = 4;
    s.link.subband_spacing_hz = 37.5e9;
    s.link.ssfm_max_step_km = 1.0;
    s.link.ssfm_max_nl_phase_rad = 0.005;
    s.link.nl_pol_model = NlPolModel::cnlse_scattered;
    s.measured_band = 1;  // an inner band
    s.n_trials = 500;
    return s;
}

// ---------------------------------------------------------------------------
// Payload encode / decode
// ---------------------------------------------------------------------------

namespace experiment_detail {

inline std::vector<OfdmSymbolGrid> encode_payload(CodecMode mode, const std::vector<int>& bits,
                                                  std::size_t n_slots, const SubcarrierLayout& lay) {
    const std::size_t k = lay.data_bins.size();
    std::vector<OfdmSymbolGrid> slots;
    slots.reserve(n_slots);
    std::size_t pos = 0;
    auto take_qpsk = [&](std::size_t n_symbols) {
        std::vector<int> chunk(bits.begin() + static_cast<std::ptrdiff_t>(pos),
                               bits.begin() + static_cast<std::ptrdiff_t>(pos + 2 * n_symbols));
        pos += 2 * n_symbols;
        return qpsk_map(chunk);
    };
    switch (mode) {
        case CodecMode::lpc_pcts:
            for (std::size_t t = 0; t < n_slots; ++t) slots.push_back(lpc_encode(take_qpsk(2 * k), lay));
            break;
        case CodecMode::ltc_pcts:
            for (std::size_t t = 0; t < n_slots; t += 2) {
                const auto px = take_qpsk(2 * k);
                const auto py = take_qpsk(2 * k);
                auto [a, b] = ltc_encode(px, py, lay);
                slots.push_back(std::move(a));
                slots.push_back(std::move(b));
            }
            break;
        case CodecMode::uncoded_pdm:
            for (std::size_t t = 0; t < n_slots; ++t) {
                const auto px = take_qpsk(k);
                const auto py = take_qpsk(k);
                slots.push_back(uncoded_pdm_reference(px, py, lay));
            }
            break;
    }
    return slots;
}

inline std::vector<int> decode_payload(CodecMode mode, const std::vector<OfdmSymbolGrid>& slots,
                                       const SubcarrierLayout& lay, const CodedConstellation& con) {
    std::vector<int> bits;
    switch (mode) {
        case CodecMode::lpc_pcts:
            for (const auto& g : slots) {
                const auto r = coherent_superpose(extract_data(g.x, lay), extract_data(g.y, lay));
                const auto d = ml_decode(r, con);
                bits.insert(bits.end(), d.bits.begin(), d.bits.end());
            }
            break;
        case CodecMode::ltc_pcts:
            for (std::size_t t = 0; t + 1 < slots.size(); t += 2) {
                const auto rx = coherent_superpose(extract_data(slots[t].x, lay),
                                                   extract_data(slots[t + 1].x, lay));
                const auto ry = coherent_superpose(extract_data(slots[t].y, lay),
                                                   extract_data(slots[t + 1].y, lay));
                const auto dx = ml_decode(rx, con);
                const auto dy = ml_decode(ry, con);
                bits.insert(bits.end(), dx.bits.begin(), dx.bits.end());
                bits.insert(bits.end(), dy.bits.begin(), dy.bits.end());
            }
            break;
        case CodecMode::uncoded_pdm:
            for (const auto& g : slots) {
                const auto bx = qpsk_demap(extract_data(g.x, lay));
                const auto by = qpsk_demap(extract_data(g.y, lay));
                bits.insert(bits.end(), bx.begin(), bx.end());
                bits.insert(bits.end(), by.begin(), by.end());
            }
            break;
    }
    return bits;
}

}  // namespace experiment_detail

// ---------------------------------------------------------------------------
// Single trial pipeline
// ---------------------------------------------------------------------------

struct TrialResult {
    QSample sample;
    LinkTelemetry telemetry;
    std::size_t flagged_subcarriers = 0;
};

/**
 * @brief One deterministic trial: tx -> superchannel -> link -> rx -> codec.
 *
 * All randomness comes from substreams keyed by (base_seed, name, trial),
 * so trials reproduce bit-identically regardless of scheduling.
 */
inline TrialResult run_trial(const ExperimentSpec& spec, std::uint64_t trial,
                             std::uint64_t config_hash = 0) {
    const SeededRng rng(spec.base_seed);
    const auto lay = make_layout(spec.ofdm);
    const auto frame_layout = make_frame_layout(spec.ofdm, lay, spec.n_training, spec.n_payload);
    const auto con = CodedConstellation::standard();
    const std::size_t slots_per_frame = spec.n_payload;
    const std::size_t total_bits = spec.payload_bits_per_trial(lay);

    // Common sample grid: 2x per band; wide enough for the whole comb.
    const double comb_extent =
        spec.link.n_subbands > 1
            ? 2.0 * (std::abs(band_offset_hz(0, spec.link.n_subbands, spec.link.subband_spacing_hz)) +
                     spec.ofdm.baud_rate_hz)
            : 2.0 * spec.ofdm.baud_rate_hz;
    std::size_t up_stages = 1;
    while (spec.ofdm.baud_rate_hz * static_cast<double>(1ull << up_stages) < comb_extent) ++up_stages;

    // Transmit side, per band. The measured band carries the payload bits;
    // neighbor bands carry independent filler from their own substreams.
    const double launch_w = dbm_to_watt(spec.link.launch_power_dbm);
    std::vector<int> tx_bits;
    std::vector<DualPolWaveform> bands;
    std::size_t active_len_1x = 0;
    for (std::size_t b = 0; b < spec.link.n_subbands; ++b) {
        Substream bit_stream = rng.stream("bits/band" + std::to_string(b), trial);
        auto bits = generate_bits(bit_stream, total_bits);

        std::vector<OfdmSymbolGrid> all_payload =
            experiment_detail::encode_payload(spec.codec, bits, spec.n_frames * slots_per_frame, lay);
        if (b == spec.measured_band) tx_bits = std::move(bits);

        DualPolWaveform stream(spec.n_frames * frame_layout.frame_symbols() * spec.ofdm.symbol_samples(),
                               spec.ofdm.baud_rate_hz);
        std::size_t off = 0;
        for (std::size_t f = 0; f < spec.n_frames; ++f) {
            std::vector<OfdmSymbolGrid> frame_payload(
                all_payload.begin() + static_cast<std::ptrdiff_t>(f * slots_per_frame),
                all_payload.begin() + static_cast<std::ptrdiff_t>((f + 1) * slots_per_frame));
            const auto fw = build_frame(frame_payload, frame_layout, spec.ofdm);
            std::copy(fw.x.begin(), fw.x.end(), stream.x.begin() + static_cast<std::ptrdiff_t>(off));
            std::copy(fw.y.begin(), fw.y.end(), stream.y.begin() + static_cast<std::ptrdiff_t>(off));
            off += fw.size();
        }
        active_len_1x = stream.size();

        auto band = pad_to_pow2(stream);
        for (std::size_t s = 0; s < up_stages; ++s) band = upsample2(band);

        // Launch-power calibration over the active (unpadded) region.
        const std::size_t active = active_len_1x << up_stages;
        double p = 0.0;
        for (std::size_t i = 0; i < active; ++i) p += std::norm(band.x[i]) + std::norm(band.y[i]);
        p /= static_cast<double>(active);
        if (p > 0.0) scale_waveform(band, std::sqrt(launch_w / p));

        if (spec.link.predispersion_fraction > 0.0)
            apply_dispersion_transfer(band, -spec.link.predispersion_fraction *
                                                spec.link.total_dispersion_ps_nm());

        Substream tx_pn = rng.stream("phase-noise-tx/band" + std::to_string(b), trial);
        apply_phase_noise(band, spec.link.laser_linewidth_hz, tx_pn);
        bands.push_back(std::move(band));
    }

    DualPolWaveform line = spec.link.n_subbands == 1
                               ? std::move(bands.front())
                               : mux_superchannel(bands, spec.link.subband_spacing_hz,
                                                  spec.ofdm.baud_rate_hz);

    TrialResult result;
    line = link_propagate(line, spec.link, rng, trial, &result.telemetry);

    if (spec.link.n_subbands > 1)
        line = demux_select(line, spec.measured_band, spec.link.n_subbands,
                            spec.link.subband_spacing_hz, spec.link.subband_spacing_hz / 2.0);

    Substream lo_pn = rng.stream("phase-noise-lo", trial);
    apply_phase_noise(line, spec.link.laser_linewidth_hz, lo_pn);

    // Down to 2x for dispersion compensation, then to the chip rate.
    while (line.sample_rate_hz > 2.0 * spec.ofdm.baud_rate_hz + 1.0) line = downsample2(line);
    const double residual_ps_nm =
        (1.0 - spec.link.predispersion_fraction) * spec.link.total_dispersion_ps_nm();
    if (residual_ps_nm != 0.0) {
        const EdcConfig edc = EdcConfig::design(residual_ps_nm, line.sample_rate_hz);
        line = edc_overlap_save(line, edc);
    }
    line = downsample2(line);

    // Frame-by-frame receive DSP and decoding.
    std::vector<int> rx_bits;
    rx_bits.reserve(total_bits);
    const std::size_t frame_samps = frame_layout.frame_symbols() * spec.ofdm.symbol_samples();
    DualPolWaveform fw(frame_samps, spec.ofdm.baud_rate_hz);
    for (std::size_t f = 0; f < spec.n_frames; ++f) {
        const std::size_t off = f * frame_samps;
        std::copy_n(line.x.begin() + static_cast<std::ptrdiff_t>(off), frame_samps, fw.x.begin());
        std::copy_n(line.y.begin() + static_cast<std::ptrdiff_t>(off), frame_samps, fw.y.begin());
        auto parsed = parse_frame(fw, frame_layout, spec.ofdm);
        const auto est = estimate_channel(parsed.training, frame_layout, lay, spec.isfa_halfwidth);
        for (auto& slot : parsed.payload) {
            result.flagged_subcarriers += equalize(slot, est);
            cpe_correct(slot, lay);
        }
        const auto bits = experiment_detail::decode_payload(spec.codec, parsed.payload, lay, con);
        rx_bits.insert(rx_bits.end(), bits.begin(), bits.end());
    }

    const auto ber = count_ber(tx_bits, rx_bits);
    result.sample = make_qsample(ber, trial, config_hash, result.telemetry.lumped_cumulated_pdl_db);
    return result;
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

struct ReportRow {
    std::size_t point_index = 0;
    double point_value = 0.0;  // power dBm / theta deg / rho dB / 0 for single+mc
    std::size_t trial = 0;
    QSample sample;
    std::size_t flagged_subcarriers = 0;
};

struct PointAggregate {
    double point_value = 0.0;
    std::size_t n_trials = 0;
    double pooled_ber = 0.0;
    double pooled_q_db = 0.0;
    bool pooled_censored = false;
    double mean_q_db = 0.0;
    double std_q_db = 0.0;
};

struct RunReport {
    ExperimentKind kind = ExperimentKind::single;
    CodecMode codec = CodecMode::lpc_pcts;
    std::uint64_t base_seed = 0;
    std::uint64_t config_hash = 0;
    std::vector<ReportRow> rows;
    std::vector<PointAggregate> points;

    // Kind-specific aggregates.
    std::optional<double> optimum_power_dbm;
    std::optional<double> q_opt_db;             // no-PDL baseline (theta sweep)
    std::vector<double> delta_q_db;             // per theta point
    std::optional<OutageEstimate> outage;
    double q_threshold_db = 0.0;
    std::optional<QPdf> q_pdf;
    std::string notes;
    double cumulated_pdl_rms_db = 0.0;
    double wall_seconds = 0.0;
    std::vector<LinkTelemetry> trial_telemetry;  // populated for single runs
};

namespace experiment_detail {

/// Run one spec variant per (point, trial) task over a small worker pool.
/// Results land in slots indexed by task, so aggregation is order-free.
inline std::vector<TrialResult> run_point_trials(const ExperimentSpec& spec, std::uint64_t config_hash) {
    std::vector<TrialResult> results(spec.n_trials);
    const std::size_t n_threads =
        std::max<std::size_t>(1, spec.threads ? spec.threads : std::thread::hardware_concurrency());
    if (n_threads == 1 || spec.n_trials == 1) {
        for (std::size_t t = 0; t < spec.n_trials; ++t)
            results[t] = run_trial(spec, t, config_hash);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < std::min(n_threads, spec.n_trials); ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t t = next.fetch_add(1);
                if (t >= spec.n_trials || failed.load()) return;
                try {
                    results[t] = run_trial(spec, t, config_hash);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    failed.store(true);
                    error_message = e.what();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error(error_message);
    return results;
}

inline PointAggregate aggregate_point(double value, const std::vector<TrialResult>& trials) {
    PointAggregate agg;
    agg.point_value = value;
    agg.n_trials = trials.size();
    std::size_t errors = 0, bits = 0;
    double qsum = 0.0, qsum2 = 0.0;
    for (const auto& t : trials) {
        errors += t.sample.error_count;
        bits += t.sample.bit_count;
        qsum += t.sample.q_db;
        qsum2 += t.sample.q_db * t.sample.q_db;
    }
    BerCount pooled;
    pooled.errors = errors;
    pooled.total = bits;
    pooled.ber = bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0;
    const auto q = make_qsample(pooled, 0, 0);
    agg.pooled_ber = q.ber;
    agg.pooled_q_db = q.q_db;
    agg.pooled_censored = q.censored;
    const double n = static_cast<double>(trials.size());
    agg.mean_q_db = qsum / n;
    agg.std_q_db = n > 1 ? std::sqrt(std::max(0.0, (qsum2 - qsum * qsum / n) / (n - 1.0))) : 0.0;
    return agg;
}

inline void append_rows(RunReport& report, std::size_t point_index, double value,
                        const std::vector<TrialResult>& trials) {
    for (std::size_t t = 0; t < trials.size(); ++t) {
        ReportRow row;
        row.point_index = point_index;
        row.point_value = value;
        row.trial = t;
        row.sample = trials[t].sample;
        row.flagged_subcarriers = trials[t].flagged_subcarriers;
        report.rows.push_back(row);
    }
    report.points.push_back(aggregate_point(value, trials));
}

}  // namespace experiment_detail

std::uint64_t spec_config_hash(const ExperimentSpec& spec);  // defined in config_io.hpp

/// tx -> link -> rx -> codec -> metrics, n_trials times at the configured
/// operating point.
inline RunReport run_single(const ExperimentSpec& spec) {
    spec.validate_or_throw();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.kind = spec.kind;
    report.codec = spec.codec;
    report.base_seed = spec.base_seed;
    report.config_hash = spec_config_hash(spec);
    report.q_threshold_db = spec.q_threshold_db;
    const auto trials = experiment_detail::run_point_trials(spec, report.config_hash);
    experiment_detail::append_rows(report, 0, spec.link.launch_power_dbm, trials);
    double rms = 0.0;
    for (const auto& t : trials) {
        rms += t.telemetry.lumped_cumulated_pdl_db * t.telemetry.lumped_cumulated_pdl_db;
        report.trial_telemetry.push_back(t.telemetry);
    }
    report.cumulated_pdl_rms_db = trials.empty() ? 0.0 : std::sqrt(rms / static_cast<double>(trials.size()));
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// One Q per launch power; identifies the max-Q optimum.
inline RunReport sweep_launch_power(const ExperimentSpec& base, const std::vector<double>& powers_dbm) {
    ExperimentSpec spec = base;
    spec.kind = ExperimentKind::power_sweep;
    spec.sweep_powers_dbm = powers_dbm;
    spec.validate_or_throw();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.kind = spec.kind;
    report.codec = spec.codec;
    report.base_seed = spec.base_seed;
    report.config_hash = spec_config_hash(spec);
    report.q_threshold_db = spec.q_threshold_db;
    for (std::size_t p = 0; p < powers_dbm.size(); ++p) {
        ExperimentSpec point = spec;
        point.link.launch_power_dbm = powers_dbm[p];
        const auto trials = experiment_detail::run_point_trials(point, report.config_hash);
        experiment_detail::append_rows(report, p, powers_dbm[p], trials);
    }
    double best_q = -1e300;
    for (const auto& pt : report.points)
        if (pt.pooled_q_db > best_q) {
            best_q = pt.pooled_q_db;
            report.optimum_power_dbm = pt.point_value;
        }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// Q-factor penalty per aligned-PDL rotation angle, relative to the no-PDL
/// run at the same (optimum) launch power.
inline RunReport sweep_theta(const ExperimentSpec& base, const std::vector<double>& thetas_deg) {
    ExperimentSpec spec = base;
    spec.kind = ExperimentKind::theta_sweep;
    spec.sweep_thetas_deg = thetas_deg;
    spec.validate_or_throw();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.kind = spec.kind;
    report.codec = spec.codec;
    report.base_seed = spec.base_seed;
    report.config_hash = spec_config_hash(spec);
    report.q_threshold_db = spec.q_threshold_db;

    // Baseline: same power, PDL removed.
    ExperimentSpec baseline = spec;
    for (auto& s : baseline.link.pdl_sections) s.rho_db = 0.0;
    const auto base_trials = experiment_detail::run_point_trials(baseline, report.config_hash);
    report.q_opt_db = experiment_detail::aggregate_point(0.0, base_trials).pooled_q_db;

    for (std::size_t p = 0; p < thetas_deg.size(); ++p) {
        ExperimentSpec point = spec;
        for (auto& s : point.link.pdl_sections) s.theta_rad = thetas_deg[p] * kPi / 180.0;
        const auto trials = experiment_detail::run_point_trials(point, report.config_hash);
        experiment_detail::append_rows(report, p, thetas_deg[p], trials);
        report.delta_q_db.push_back(q_penalty(*report.q_opt_db, report.points.back().pooled_q_db));
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// Q per per-section PDL value at fixed theta (aligned model).
inline RunReport sweep_pdl(const ExperimentSpec& base, const std::vector<double>& rhos_db) {
    ExperimentSpec spec = base;
    spec.kind = ExperimentKind::pdl_sweep;
    spec.sweep_pdl_db = rhos_db;
    spec.validate_or_throw();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.kind = spec.kind;
    report.codec = spec.codec;
    report.base_seed = spec.base_seed;
    report.config_hash = spec_config_hash(spec);
    report.q_threshold_db = spec.q_threshold_db;
    for (std::size_t p = 0; p < rhos_db.size(); ++p) {
        ExperimentSpec point = spec;
        for (auto& s : point.link.pdl_sections) s.rho_db = rhos_db[p];
        const auto trials = experiment_detail::run_point_trials(point, report.config_hash);
        experiment_detail::append_rows(report, p, rhos_db[p], trials);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// Statistical-PDL Monte Carlo: fresh SOP and theta draws per trial;
/// Q-factor PDF, outage probability at the configured threshold, and the
/// cumulated-PDL rms across trials.
inline RunReport monte_carlo_statistical(const ExperimentSpec& base) {
    ExperimentSpec spec = base;
    spec.kind = ExperimentKind::monte_carlo;
    spec.validate_or_throw();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.kind = spec.kind;
    report.codec = spec.codec;
    report.base_seed = spec.base_seed;
    report.config_hash = spec_config_hash(spec);
    report.q_threshold_db = spec.q_threshold_db;
    const auto trials = experiment_detail::run_point_trials(spec, report.config_hash);
    experiment_detail::append_rows(report, 0, 0.0, trials);

    std::vector<QSample> samples;
    std::vector<double> qs;
    double rms = 0.0;
    for (const auto& t : trials) {
        samples.push_back(t.sample);
        qs.push_back(t.sample.q_db);
        rms += t.telemetry.lumped_cumulated_pdl_db * t.telemetry.lumped_cumulated_pdl_db;
    }
    report.cumulated_pdl_rms_db = std::sqrt(rms / static_cast<double>(trials.size()));
    report.outage = outage_probability(samples, spec.q_threshold_db);
    if (samples.size() >= 10)
        report.q_pdf = estimate_q_pdf(qs);
    else
        report.notes = "q_pdf omitted: need at least 10 trials for a density estimate";
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace pctsim

#include "pctsim/config_io.hpp"  // spec_config_hash + JSON round trip

#endif
