#include <catch_amalgamated.hpp>

#include <cmath>

#include "pctsim/metrics.hpp"
#include "pctsim/rng.hpp"

using namespace pctsim;

TEST_CASE("count_ber: identical, complemented, arithmetic") {
    std::vector<int> a(1000, 0);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<int>(i % 2);

    REQUIRE(count_ber(a, a).ber == 0.0);

    std::vector<int> inv(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) inv[i] = 1 - a[i];
    const auto c = count_ber(a, inv);
    REQUIRE(c.ber == 1.0);
    const auto sample = make_qsample(c, 1, 2);
    REQUIRE(sample.inverted);
    REQUIRE(sample.ber == 0.5);

    std::vector<int> three = a;
    three[10] = 1 - three[10];
    three[500] = 1 - three[500];
    three[999] = 1 - three[999];
    REQUIRE(count_ber(a, three).ber == Catch::Approx(0.003).margin(1e-15));

    REQUIRE_THROWS_AS(count_ber(a, std::vector<int>(999)), std::invalid_argument);
}

TEST_CASE("q_from_ber: reference points against the erfc oracle") {
    // 3.8e-3 (a common HD-FEC threshold) -> 8.52 dB.
    REQUIRE(q_from_ber(3.8e-3) == Catch::Approx(8.52).margin(0.02));

    // 5.7 dB <-> BER ~ 2.7e-2 (SD-FEC threshold), both directions.
    REQUIRE(ber_from_q_db(5.7) == Catch::Approx(2.7e-2).epsilon(0.02));
    REQUIRE(q_from_ber(ber_from_q_db(5.7)) == Catch::Approx(5.7).margin(1e-9));

    // ber = 0.25: oracle evaluation gives 20 log10(sqrt2 erfcinv(0.5))
    // = 20 log10(0.674490) = -3.4205 dB.
    REQUIRE(q_from_ber(0.25) == Catch::Approx(-3.4205).margin(1e-3));

    REQUIRE_THROWS_AS(q_from_ber(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(q_from_ber(0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(q_from_ber(0.7), std::invalid_argument);
}

TEST_CASE("q_from_ber: round trip and monotonicity") {
    double prev = 1e9;
    for (double ber = 1e-6; ber < 0.4; ber *= 1.9) {
        const double q = q_from_ber(ber);
        REQUIRE(q < prev);  // monotone decreasing in ber
        prev = q;
        const double back = ber_from_q_db(q);
        REQUIRE(back == Catch::Approx(ber).epsilon(1e-9));
    }
}

TEST_CASE("q_penalty") {
    REQUIRE(q_penalty(9.0, 9.0) == 0.0);
    REQUIRE(q_penalty(9.0, 7.16) == Catch::Approx(1.84).margin(1e-12));
    REQUIRE(q_penalty(7.16, 9.0) == -q_penalty(9.0, 7.16));
}

TEST_CASE("censored zero-error reporting") {
    BerCount clean;
    clean.errors = 0;
    clean.total = 100000;
    clean.ber = 0.0;
    const auto s = make_qsample(clean, 3, 4);
    REQUIRE(s.censored);
    REQUIRE(s.ber == Catch::Approx(1e-5).margin(1e-18));
    REQUIRE(s.q_db == Catch::Approx(q_from_ber(1e-5)).margin(1e-12));
}

TEST_CASE("outage probability with Wilson interval") {
    std::vector<QSample> samples;
    for (int i = 0; i < 40; ++i) {
        QSample q;
        q.q_db = 6.0 + 0.1 * i;  // 6.0 .. 9.9
        samples.push_back(q);
    }
    REQUIRE(outage_probability(samples, 5.0).probability == 0.0);
    REQUIRE(outage_probability(samples, 20.0).probability == 1.0);

    const auto e = outage_probability(samples, 7.0);  // 10 of 40 below
    REQUIRE(e.probability == Catch::Approx(0.25).margin(1e-12));
    REQUIRE(e.wilson_low < 0.25);
    REQUIRE(e.wilson_high > 0.25);
    REQUIRE(e.wilson_low > 0.12);
    REQUIRE(e.wilson_high < 0.42);

    // Monotone nondecreasing in the threshold.
    double prev = 0.0;
    for (double qt = 5.0; qt < 11.0; qt += 0.25) {
        const double p = outage_probability(samples, qt).probability;
        REQUIRE(p >= prev);
        prev = p;
    }

    REQUIRE_THROWS_AS(outage_probability({}, 5.7), std::invalid_argument);
}

TEST_CASE("q pdf: normalization, constant samples, normal data") {
    SeededRng rng(13);
    Substream s = rng.stream("ase");

    std::vector<double> values(10000);
    for (auto& v : values) v = s.normal();
    const auto pdf = estimate_q_pdf(values);
    double integral = 0.0, mean = 0.0;
    for (std::size_t b = 0; b + 1 < pdf.edges.size(); ++b) {
        const double w = pdf.edges[b + 1] - pdf.edges[b];
        integral += pdf.densities[b] * w;
        mean += pdf.densities[b] * w * 0.5 * (pdf.edges[b] + pdf.edges[b + 1]);
    }
    REQUIRE(integral == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(std::abs(mean) < 3.0 / std::sqrt(10000.0));

    const std::vector<double> flat(64, 2.5);
    const auto single = estimate_q_pdf(flat);
    REQUIRE(single.densities.size() == 1);
    REQUIRE(single.densities[0] * (single.edges[1] - single.edges[0]) ==
            Catch::Approx(1.0).margin(1e-12));

    REQUIRE_THROWS_AS(estimate_q_pdf(std::vector<double>(5, 1.0)), std::invalid_argument);
}
