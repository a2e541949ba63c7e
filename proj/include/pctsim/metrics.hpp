#ifndef PCTSIM_METRICS_HPP
#define PCTSIM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pctsim/constants.hpp"

namespace pctsim {

struct BerCount {
    std::size_t errors = 0;
    std::size_t total = 0;
    double ber = 0.0;
};

inline BerCount count_ber(const std::vector<int>& tx, const std::vector<int>& rx) {
    if (tx.size() != rx.size()) throw std::invalid_argument("count_ber: length mismatch");
    if (tx.empty()) throw std::invalid_argument("count_ber: empty streams");
    BerCount c;
    c.total = tx.size();
    for (std::size_t i = 0; i < tx.size(); ++i) c.errors += (tx[i] != rx[i]) ? 1u : 0u;
    c.ber = static_cast<double>(c.errors) / static_cast<double>(c.total);
    return c;
}

namespace metrics_detail {

/// Inverse of ber = 0.5 erfc(q / sqrt 2) on q in (0, 45): bisection to
/// machine precision plus one Newton polish.
inline double q_linear_from_ber(double ber) {
    double lo = 0.0, hi = 45.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(mid / std::sqrt(2.0)) > ber)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15 * (1.0 + lo)) break;
    }
    double q = 0.5 * (lo + hi);
    const double pdf = std::exp(-0.5 * q * q) / std::sqrt(2.0 * kPi);
    if (pdf > 0.0) q -= (ber - 0.5 * std::erfc(q / std::sqrt(2.0))) / pdf;
    return q;
}

}  // namespace metrics_detail

/// Gaussian-equivalent Q-factor, Q_dB = 20 log10(sqrt2 erfcinv(2 ber)).
inline double q_from_ber(double ber) {
    if (!(ber > 0.0)) throw std::invalid_argument("q_from_ber: ber must be > 0");
    if (ber >= 0.5) throw std::invalid_argument("q_from_ber: ber must be < 0.5");
    return 20.0 * std::log10(metrics_detail::q_linear_from_ber(ber));
}

/// Inverse direction for thresholds: BER at a given Q (dB).
inline double ber_from_q_db(double q_db) {
    const double q = std::pow(10.0, q_db / 20.0);
    return 0.5 * std::erfc(q / std::sqrt(2.0));
}

/// Q-factor penalty dQ = Q_opt - Q (dB).
inline double q_penalty(double q_opt_db, double q_db) { return q_opt_db - q_db; }

/**
 * @brief One trial's quality numbers with provenance.
 *
 * ber is clamped to [0, 0.5]. A zero error count is reported as the
 * censored lower bound 1/bit_count (flagged); an inverted stream
 * (raw ber > 0.5) is clamped and flagged.
 */
struct QSample {
    double q_db = 0.0;
    double ber = 0.0;
    std::size_t error_count = 0;
    std::size_t bit_count = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    double cumulated_pdl_db = 0.0;
    bool censored = false;    // ber floor used (no observed errors)
    bool inverted = false;    // raw ber exceeded 0.5
};

inline QSample make_qsample(const BerCount& c, std::uint64_t seed, std::uint64_t config_hash,
                            double cumulated_pdl_db = 0.0) {
    QSample s;
    s.error_count = c.errors;
    s.bit_count = c.total;
    s.seed = seed;
    s.config_hash = config_hash;
    s.cumulated_pdl_db = cumulated_pdl_db;
    double ber = c.ber;
    if (c.errors == 0) {
        s.censored = true;
        ber = 1.0 / static_cast<double>(c.total);
    } else if (ber > 0.5) {
        s.inverted = true;
        ber = 0.5;
    }
    s.ber = ber;
    const double usable = std::min(ber, 0.5 - 0.5 / static_cast<double>(c.total));
    s.q_db = q_from_ber(usable);
    return s;
}

struct OutageEstimate {
    double probability = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
    std::size_t below = 0;
    std::size_t total = 0;
};

/// Pr[Q < q_t] over the sample set, with a Wilson 95% interval.
inline OutageEstimate outage_probability(const std::vector<QSample>& samples, double q_t_db) {
    if (samples.empty()) throw std::invalid_argument("outage_probability: empty sample set");
    OutageEstimate e;
    e.total = samples.size();
    for (const auto& s : samples) e.below += (s.q_db < q_t_db) ? 1u : 0u;
    const double n = static_cast<double>(e.total);
    const double p = static_cast<double>(e.below) / n;
    e.probability = p;
    const double z = 1.959963984540054;  // 97.5% normal quantile
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    e.wilson_low = std::max(0.0, center - half);
    e.wilson_high = std::min(1.0, center + half);
    return e;
}

struct QPdf {
    std::vector<double> edges;      // size bins+1
    std::vector<double> densities;  // size bins; integrates to 1
};

/// Normalized histogram with Freedman-Diaconis bin width.
inline QPdf estimate_q_pdf(const std::vector<double>& values) {
    if (values.size() < 10) throw std::invalid_argument("estimate_q_pdf: need at least 10 samples");
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return i + 1 < n ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    const double span = v.back() - v.front();
    double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));

    QPdf pdf;
    if (width <= 0.0 || span <= 0.0) {
        // Degenerate spread: one bin of unit width around the value.
        const double center = v.front();
        pdf.edges = {center - 0.5, center + 0.5};
        pdf.densities = {1.0};
        return pdf;
    }
    const std::size_t bins = static_cast<std::size_t>(std::ceil(span / width));
    width = span / static_cast<double>(bins);
    pdf.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        pdf.edges[i] = v.front() + width * static_cast<double>(i);
    pdf.densities.assign(bins, 0.0);
    for (double x : v) {
        std::size_t b = static_cast<std::size_t>((x - v.front()) / width);
        if (b >= bins) b = bins - 1;
        pdf.densities[b] += 1.0;
    }
    for (auto& d : pdf.densities) d /= static_cast<double>(n) * width;
    return pdf;
}

}  // namespace pctsim

#endif
