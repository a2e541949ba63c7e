#ifndef PCTSIM_REPORT_HPP
#define PCTSIM_REPORT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pctsim/config_io.hpp"
#include "pctsim/experiment.hpp"

namespace pctsim {

namespace report_detail {

/// Floats with 9 significant digits, fixed column order.
inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace report_detail

/// One CSV row per (sweep point, trial). Column order is fixed:
/// experiment,codec,point_index,point_value,trial,seed,config_hash,ber,
/// errors,bit_count,q_db,censored,inverted,cumulated_pdl_db,flagged_subcarriers
inline std::string rows_csv(const RunReport& report) {
    std::ostringstream os;
    os << "experiment,codec,point_index,point_value,trial,seed,config_hash,ber,errors,bit_count,"
          "q_db,censored,inverted,cumulated_pdl_db,flagged_subcarriers\n";
    for (const auto& r : report.rows) {
        os << to_string(report.kind) << ',' << to_string(report.codec) << ',' << r.point_index << ','
           << report_detail::fmt9(r.point_value) << ',' << r.trial << ',' << r.sample.seed << ','
           << "0x" << std::hex << report.config_hash << std::dec << ','
           << report_detail::fmt9(r.sample.ber) << ',' << r.sample.error_count << ','
           << r.sample.bit_count << ',' << report_detail::fmt9(r.sample.q_db) << ','
           << (r.sample.censored ? 1 : 0) << ',' << (r.sample.inverted ? 1 : 0) << ','
           << report_detail::fmt9(r.sample.cumulated_pdl_db) << ',' << r.flagged_subcarriers << '\n';
    }
    return os.str();
}

inline json summary_json(const RunReport& report, const ExperimentSpec& spec) {
    json j;
    j["experiment"] = to_string(report.kind);
    j["codec"] = to_string(report.codec);
    j["base_seed"] = report.base_seed;
    char hash[24];
    std::snprintf(hash, sizeof(hash), "0x%016llx", static_cast<unsigned long long>(report.config_hash));
    j["config_hash"] = hash;
    j["wall_seconds"] = report.wall_seconds;

    json points = json::array();
    for (const auto& p : report.points)
        points.push_back(json{{"point_value", p.point_value},
                              {"n_trials", p.n_trials},
                              {"pooled_ber", p.pooled_ber},
                              {"pooled_q_db", p.pooled_q_db},
                              {"pooled_censored", p.pooled_censored},
                              {"mean_q_db", p.mean_q_db},
                              {"std_q_db", p.std_q_db}});
    j["points"] = points;

    if (report.optimum_power_dbm) j["optimum_power_dbm"] = *report.optimum_power_dbm;
    if (report.q_opt_db) j["q_opt_db"] = *report.q_opt_db;
    if (!report.delta_q_db.empty()) j["delta_q_db"] = report.delta_q_db;
    if (report.outage)
        j["outage"] = json{{"q_threshold_db", report.q_threshold_db},
                           {"probability", report.outage->probability},
                           {"wilson_low", report.outage->wilson_low},
                           {"wilson_high", report.outage->wilson_high},
                           {"below", report.outage->below},
                           {"total", report.outage->total}};
    if (report.q_pdf)
        j["q_pdf"] = json{{"edges", report.q_pdf->edges}, {"densities", report.q_pdf->densities}};
    if (report.cumulated_pdl_rms_db > 0.0) j["cumulated_pdl_rms_db"] = report.cumulated_pdl_rms_db;
    if (!report.notes.empty()) j["notes"] = report.notes;

    if (!report.trial_telemetry.empty()) {
        json tel = json::array();
        for (const auto& t : report.trial_telemetry) {
            json sops = json::array();
            for (const auto& s : t.section_sop)
                sops.push_back(json::array({s.a.real(), s.a.imag(), s.b.real(), s.b.imag(),
                                            s.c.real(), s.c.imag(), s.d.real(), s.d.imag()}));
            tel.push_back(json{{"section_theta_rad", t.section_theta_rad},
                               {"section_sop", sops},
                               {"cumulated_pdl_db", t.lumped_cumulated_pdl_db},
                               {"span_launch_dbm", t.span_launch_dbm}});
        }
        j["telemetry"] = tel;
    }
    j["config"] = spec_to_json(spec);
    return j;
}

// ---------------------------------------------------------------------------
// Minimal SVG plotting (Q vs power, dQ vs theta, Q PDF)
// ---------------------------------------------------------------------------

namespace report_detail {

struct Axes {
    double x0, x1, y0, y1;
    static constexpr int w = 640, h = 420, ml = 70, mr = 20, mt = 24, mb = 52;
    double px(double x) const { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); }
    double py(double y) const { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); }
};

inline void svg_header(std::ostringstream& os, const Axes& a, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel) {
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << a.w << "' height='" << a.h << "'>\n"
       << "<rect width='100%' height='100%' fill='white'/>\n"
       << "<text x='" << a.w / 2 << "' y='16' text-anchor='middle' font-size='14'>" << title
       << "</text>\n";
    // frame + ticks
    os << "<rect x='" << a.ml << "' y='" << a.mt << "' width='" << a.w - a.ml - a.mr << "' height='"
       << a.h - a.mt - a.mb << "' fill='none' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = a.x0 + (a.x1 - a.x0) * i / 5.0;
        const double y = a.y0 + (a.y1 - a.y0) * i / 5.0;
        os << "<text x='" << a.px(x) << "' y='" << a.h - a.mb + 16
           << "' text-anchor='middle' font-size='11'>" << fmt9(std::round(x * 100) / 100) << "</text>\n";
        os << "<text x='" << a.ml - 6 << "' y='" << a.py(y) + 4
           << "' text-anchor='end' font-size='11'>" << fmt9(std::round(y * 100) / 100) << "</text>\n";
    }
    os << "<text x='" << (a.ml + a.w - a.mr) / 2 << "' y='" << a.h - 14
       << "' text-anchor='middle' font-size='12'>" << xlabel << "</text>\n";
    os << "<text x='16' y='" << (a.mt + a.h - a.mb) / 2
       << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 "
       << (a.mt + a.h - a.mb) / 2 << ")'>" << ylabel << "</text>\n";
}

inline std::string line_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                             const std::string& title, const std::string& xlabel,
                             const std::string& ylabel) {
    Axes a{};
    a.x0 = xs.front();
    a.x1 = xs.back() == xs.front() ? xs.front() + 1.0 : xs.back();
    double ymin = ys.front(), ymax = ys.front();
    for (double y : ys) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    const double pad = std::max(0.25, (ymax - ymin) * 0.1);
    a.y0 = ymin - pad;
    a.y1 = ymax + pad;
    std::ostringstream os;
    svg_header(os, a, title, xlabel, ylabel);
    os << "<polyline fill='none' stroke='steelblue' stroke-width='2' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) os << a.px(xs[i]) << ',' << a.py(ys[i]) << ' ';
    os << "'/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << "<circle cx='" << a.px(xs[i]) << "' cy='" << a.py(ys[i])
           << "' r='3.5' fill='steelblue'/>\n";
    os << "</svg>\n";
    return os.str();
}

inline std::string pdf_plot(const QPdf& pdf, const std::string& title) {
    Axes a{};
    a.x0 = pdf.edges.front();
    a.x1 = pdf.edges.back();
    a.y0 = 0.0;
    a.y1 = 0.0;
    for (double d : pdf.densities) a.y1 = std::max(a.y1, d);
    a.y1 *= 1.1;
    if (a.y1 <= 0.0) a.y1 = 1.0;
    std::ostringstream os;
    svg_header(os, a, title, "Q-factor (dB)", "probability density");
    for (std::size_t b = 0; b < pdf.densities.size(); ++b) {
        const double x = a.px(pdf.edges[b]);
        const double wdt = a.px(pdf.edges[b + 1]) - x;
        const double y = a.py(pdf.densities[b]);
        os << "<rect x='" << x << "' y='" << y << "' width='" << wdt << "' height='"
           << a.py(0.0) - y << "' fill='steelblue' fill-opacity='0.7' stroke='black'/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace report_detail

struct EmitOptions {
    bool plots = false;
    std::string prefix = "report";
};

/// CSV (one row per trial/point) + JSON summary; optional SVG plots of
/// Q vs power, dQ vs theta, and the Q PDF. Returns the written paths.
inline std::vector<std::string> emit_report(const RunReport& report, const ExperimentSpec& spec,
                                            const std::string& out_dir, const EmitOptions& opt = {}) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::vector<std::string> written;
    auto write_file = [&](const std::string& name, const std::string& payload) {
        const std::string path = (fs::path(out_dir) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::system_error(std::make_error_code(std::errc::io_error),
                                        "cannot write " + path);
        f << payload;
        if (!f.good()) throw std::system_error(std::make_error_code(std::errc::io_error),
                                               "write failed for " + path);
        written.push_back(path);
    };

    write_file(opt.prefix + "_trials.csv", rows_csv(report));
    write_file(opt.prefix + "_summary.json", summary_json(report, spec).dump(2) + "\n");

    if (opt.plots) {
        std::vector<double> xs, ys;
        for (const auto& p : report.points) {
            xs.push_back(p.point_value);
            ys.push_back(p.pooled_q_db);
        }
        if (report.kind == ExperimentKind::power_sweep && xs.size() >= 2)
            write_file(opt.prefix + "_q_vs_power.svg",
                       report_detail::line_plot(xs, ys, "Q-factor vs launch power",
                                                "launch power (dBm)", "Q-factor (dB)"));
        if (report.kind == ExperimentKind::theta_sweep && !report.delta_q_db.empty())
            write_file(opt.prefix + "_dq_vs_theta.svg",
                       report_detail::line_plot(xs, report.delta_q_db, "Q-factor penalty vs theta",
                                                "rotation angle (deg)", "dQ (dB)"));
        if (report.kind == ExperimentKind::pdl_sweep && xs.size() >= 2)
            write_file(opt.prefix + "_q_vs_pdl.svg",
                       report_detail::line_plot(xs, ys, "Q-factor vs per-section PDL",
                                                "PDL per section (dB)", "Q-factor (dB)"));
        if (report.q_pdf)
            write_file(opt.prefix + "_q_pdf.svg",
                       report_detail::pdf_plot(*report.q_pdf, "Q-factor PDF"));
    }
    return written;
}

}  // namespace pctsim

#endif
