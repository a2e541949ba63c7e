#ifndef PCTSIM_CONFIG_IO_HPP
#define PCTSIM_CONFIG_IO_HPP

#include <json.hpp>

#include <string>
#include <vector>

#include "pctsim/experiment.hpp"

namespace pctsim {

using json = nlohmann::json;

namespace config_detail {

inline void reject_unknown(const json& obj, const std::vector<std::string>& known,
                           const std::string& path, std::vector<std::string>& errors) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const auto& k : known) ok |= (k == key);
        if (!ok) errors.push_back(path + key + ": unknown key");
        (void)value;
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

inline SpanParams parse_span(const json& j, const std::string& path, std::vector<std::string>& errors,
                             SpanParams base) {
    reject_unknown(j,
                   {"length_km", "attenuation_db_per_km", "dispersion_ps_nm_km",
                    "nonlinear_coeff_per_w_km", "pmd_mean_dgd_ps"},
                   path, errors);
    read(j, "length_km", base.length_km);
    read(j, "attenuation_db_per_km", base.attenuation_db_per_km);
    read(j, "dispersion_ps_nm_km", base.dispersion_ps_nm_km);
    read(j, "nonlinear_coeff_per_w_km", base.nonlinear_coeff_per_w_km);
    read(j, "pmd_mean_dgd_ps", base.pmd_mean_dgd_ps);
    return base;
}

inline json span_to_json(const SpanParams& s) {
    return json{{"length_km", s.length_km},
                {"attenuation_db_per_km", s.attenuation_db_per_km},
                {"dispersion_ps_nm_km", s.dispersion_ps_nm_km},
                {"nonlinear_coeff_per_w_km", s.nonlinear_coeff_per_w_km},
                {"pmd_mean_dgd_ps", s.pmd_mean_dgd_ps}};
}

}  // namespace config_detail

/**
 * @brief Parse an ExperimentSpec from JSON. Unknown keys are rejected with
 * their full path; the desk_scale flag selects which preset supplies the
 * defaults that the document then overrides.
 */
inline ExperimentSpec spec_from_json(const json& root, std::optional<bool> desk_override = {}) {
    using namespace config_detail;
    std::vector<std::string> errors;
    if (!root.is_object()) throw ConfigError({"config root must be a JSON object"});

    bool desk = true;
    read(root, "desk_scale", desk);
    if (desk_override) desk = *desk_override;
    ExperimentSpec spec = desk ? desk_scale_spec() : full_scale_spec();
    spec.desk_scale = desk;

    reject_unknown(root,
                   {"experiment", "codec", "base_seed", "n_trials", "desk_scale", "threads",
                    "q_threshold_db", "measured_band", "ofdm", "frame", "rxdsp", "link", "sweep"},
                   "", errors);

    if (root.contains("experiment")) {
        const std::string kind = root.at("experiment").get<std::string>();
        if (kind == "single") spec.kind = ExperimentKind::single;
        else if (kind == "power_sweep") spec.kind = ExperimentKind::power_sweep;
        else if (kind == "theta_sweep") spec.kind = ExperimentKind::theta_sweep;
        else if (kind == "pdl_sweep") spec.kind = ExperimentKind::pdl_sweep;
        else if (kind == "monte_carlo") spec.kind = ExperimentKind::monte_carlo;
        else errors.push_back("experiment: unknown kind '" + kind + "'");
    }
    if (root.contains("codec")) {
        const std::string codec = root.at("codec").get<std::string>();
        if (codec == "lpc_pcts") spec.codec = CodecMode::lpc_pcts;
        else if (codec == "ltc_pcts") spec.codec = CodecMode::ltc_pcts;
        else if (codec == "uncoded_pdm") spec.codec = CodecMode::uncoded_pdm;
        else errors.push_back("codec: unknown mode '" + codec + "'");
    }
    read(root, "base_seed", spec.base_seed);
    read(root, "n_trials", spec.n_trials);
    read(root, "threads", spec.threads);
    read(root, "q_threshold_db", spec.q_threshold_db);
    read(root, "measured_band", spec.measured_band);

    if (root.contains("ofdm")) {
        const json& j = root.at("ofdm");
        reject_unknown(j, {"fft_size", "data_subcarriers", "pilot_count", "cp_fraction", "baud_rate_hz"},
                       "ofdm.", errors);
        std::size_t fft = spec.ofdm.fft_size, data = spec.ofdm.data_subcarrier_count;
        std::size_t pilots = spec.ofdm.pilot_list_positions.size();
        double cp = spec.ofdm.cp_fraction, baud = spec.ofdm.baud_rate_hz;
        read(j, "fft_size", fft);
        read(j, "data_subcarriers", data);
        read(j, "pilot_count", pilots);
        read(j, "cp_fraction", cp);
        read(j, "baud_rate_hz", baud);
        try {
            spec.ofdm = make_ofdm_config(fft, data, pilots, cp, baud);
        } catch (const std::exception& e) {
            errors.push_back(std::string("ofdm: ") + e.what());
        }
    }

    if (root.contains("frame")) {
        const json& j = root.at("frame");
        reject_unknown(j, {"n_training", "n_payload", "n_frames"}, "frame.", errors);
        read(j, "n_training", spec.n_training);
        read(j, "n_payload", spec.n_payload);
        read(j, "n_frames", spec.n_frames);
    }

    if (root.contains("rxdsp")) {
        const json& j = root.at("rxdsp");
        reject_unknown(j, {"isfa_halfwidth"}, "rxdsp.", errors);
        read(j, "isfa_halfwidth", spec.isfa_halfwidth);
    }

    if (root.contains("link")) {
        const json& j = root.at("link");
        reject_unknown(j,
                       {"spans", "span_count", "span", "pdl_section_count", "pdl_rho_db", "pdl_model",
                        "pdl_theta_deg", "edfa_gain_db", "edfa_nf_db", "laser_linewidth_hz",
                        "launch_power_dbm", "n_subbands", "subband_spacing_hz", "ssfm_max_step_km",
                        "ssfm_max_nl_phase_rad", "predispersion_fraction", "nl_pol_model", "ase_on"},
                       "link.", errors);
        if (j.contains("spans") && (j.contains("span_count") || j.contains("span")))
            errors.push_back("link.spans: give either an explicit span list or span_count + span");
        if (j.contains("spans")) {
            spec.link.spans.clear();
            std::size_t i = 0;
            for (const auto& s : j.at("spans"))
                spec.link.spans.push_back(
                    parse_span(s, "link.spans[" + std::to_string(i++) + "].", errors, SpanParams{}));
        } else {
            SpanParams tpl = spec.link.spans.empty() ? SpanParams{} : spec.link.spans.front();
            if (j.contains("span")) tpl = parse_span(j.at("span"), "link.span.", errors, tpl);
            std::size_t count = spec.link.spans.size();
            read(j, "span_count", count);
            spec.link.spans.assign(count, tpl);
        }

        std::size_t sections = spec.link.pdl_sections.size();
        double rho = sections ? spec.link.pdl_sections.front().rho_db : 0.0;
        double theta_deg =
            sections ? spec.link.pdl_sections.front().theta_rad * 180.0 / kPi : 0.0;
        PdlModel model = sections ? spec.link.pdl_sections.front().model : PdlModel::aligned;
        read(j, "pdl_section_count", sections);
        read(j, "pdl_rho_db", rho);
        read(j, "pdl_theta_deg", theta_deg);
        if (j.contains("pdl_model")) {
            const std::string m = j.at("pdl_model").get<std::string>();
            if (m == "aligned") model = PdlModel::aligned;
            else if (m == "statistical") model = PdlModel::statistical;
            else errors.push_back("link.pdl_model: must be 'aligned' or 'statistical'");
        }
        spec.link.pdl_sections.assign(sections, PdlSection{rho, theta_deg * kPi / 180.0, model});

        read(j, "edfa_gain_db", spec.link.edfa_gain_db);
        read(j, "edfa_nf_db", spec.link.edfa_nf_db);
        read(j, "laser_linewidth_hz", spec.link.laser_linewidth_hz);
        read(j, "launch_power_dbm", spec.link.launch_power_dbm);
        read(j, "n_subbands", spec.link.n_subbands);
        read(j, "subband_spacing_hz", spec.link.subband_spacing_hz);
        read(j, "ssfm_max_step_km", spec.link.ssfm_max_step_km);
        read(j, "ssfm_max_nl_phase_rad", spec.link.ssfm_max_nl_phase_rad);
        read(j, "predispersion_fraction", spec.link.predispersion_fraction);
        if (j.contains("nl_pol_model")) {
            const std::string m = j.at("nl_pol_model").get<std::string>();
            if (m == "manakov") spec.link.nl_pol_model = NlPolModel::manakov;
            else if (m == "cnlse_scattered") spec.link.nl_pol_model = NlPolModel::cnlse_scattered;
            else errors.push_back("link.nl_pol_model: must be 'manakov' or 'cnlse_scattered'");
        }
        read(j, "ase_on", spec.link.ase_on);
    }

    if (root.contains("sweep")) {
        const json& j = root.at("sweep");
        reject_unknown(j, {"powers_dbm", "thetas_deg", "pdl_db"}, "sweep.", errors);
        read(j, "powers_dbm", spec.sweep_powers_dbm);
        read(j, "thetas_deg", spec.sweep_thetas_deg);
        read(j, "pdl_db", spec.sweep_pdl_db);
    }

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return spec;
}

inline json spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["experiment"] = to_string(spec.kind);
    j["codec"] = to_string(spec.codec);
    j["base_seed"] = spec.base_seed;
    j["n_trials"] = spec.n_trials;
    j["desk_scale"] = spec.desk_scale;
    j["threads"] = spec.threads;
    j["q_threshold_db"] = spec.q_threshold_db;
    j["measured_band"] = spec.measured_band;
    j["ofdm"] = json{{"fft_size", spec.ofdm.fft_size},
                     {"data_subcarriers", spec.ofdm.data_subcarrier_count},
                     {"pilot_count", spec.ofdm.pilot_list_positions.size()},
                     {"cp_fraction", spec.ofdm.cp_fraction},
                     {"baud_rate_hz", spec.ofdm.baud_rate_hz}};
    j["frame"] = json{{"n_training", spec.n_training},
                      {"n_payload", spec.n_payload},
                      {"n_frames", spec.n_frames}};
    j["rxdsp"] = json{{"isfa_halfwidth", spec.isfa_halfwidth}};
    json link;
    bool uniform = !spec.link.spans.empty();
    for (const auto& s : spec.link.spans) {
        const auto& f = spec.link.spans.front();
        uniform &= s.length_km == f.length_km && s.attenuation_db_per_km == f.attenuation_db_per_km &&
                   s.dispersion_ps_nm_km == f.dispersion_ps_nm_km &&
                   s.nonlinear_coeff_per_w_km == f.nonlinear_coeff_per_w_km &&
                   s.pmd_mean_dgd_ps == f.pmd_mean_dgd_ps;
    }
    if (uniform) {
        link["span_count"] = spec.link.spans.size();
        link["span"] = config_detail::span_to_json(spec.link.spans.front());
    } else {
        json arr = json::array();
        for (const auto& s : spec.link.spans) arr.push_back(config_detail::span_to_json(s));
        link["spans"] = arr;
    }
    link["pdl_section_count"] = spec.link.pdl_sections.size();
    link["pdl_rho_db"] = spec.link.pdl_sections.empty() ? 0.0 : spec.link.pdl_sections.front().rho_db;
    link["pdl_theta_deg"] = spec.link.pdl_sections.empty()
                                ? 0.0
                                : spec.link.pdl_sections.front().theta_rad * 180.0 / kPi;
    link["pdl_model"] = (!spec.link.pdl_sections.empty() &&
                         spec.link.pdl_sections.front().model == PdlModel::statistical)
                            ? "statistical"
                            : "aligned";
    link["edfa_gain_db"] = spec.link.edfa_gain_db;
    link["edfa_nf_db"] = spec.link.edfa_nf_db;
    link["laser_linewidth_hz"] = spec.link.laser_linewidth_hz;
    link["launch_power_dbm"] = spec.link.launch_power_dbm;
    link["n_subbands"] = spec.link.n_subbands;
    link["subband_spacing_hz"] = spec.link.subband_spacing_hz;
    link["ssfm_max_step_km"] = spec.link.ssfm_max_step_km;
    link["ssfm_max_nl_phase_rad"] = spec.link.ssfm_max_nl_phase_rad;
    link["predispersion_fraction"] = spec.link.predispersion_fraction;
    link["nl_pol_model"] =
        spec.link.nl_pol_model == NlPolModel::cnlse_scattered ? "cnlse_scattered" : "manakov";
    link["ase_on"] = spec.link.ase_on;
    j["link"] = link;
    j["sweep"] = json{{"powers_dbm", spec.sweep_powers_dbm},
                      {"thetas_deg", spec.sweep_thetas_deg},
                      {"pdl_db", spec.sweep_pdl_db}};
    return j;
}

/// Stable hash of the canonical JSON form (nlohmann sorts object keys).
/// Execution knobs that cannot change results (worker threads) stay out.
inline std::uint64_t spec_config_hash(const ExperimentSpec& spec) {
    json j = spec_to_json(spec);
    j.erase("threads");
    return detail::fnv1a64(j.dump());
}

}  // namespace pctsim

#endif
