#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "pctsim/constants.hpp"
#include "pctsim/jones.hpp"
#include "pctsim/rng.hpp"
#include "pctsim/waveform.hpp"

using namespace pctsim;

TEST_CASE("generate_bits: empty, determinism, balance") {
    SeededRng rng(7);
    {
        Substream s = rng.stream("bits");
        REQUIRE(generate_bits(s, 0).empty());
    }
    {
        Substream a = rng.stream("bits");
        Substream b = rng.stream("bits");
        REQUIRE(generate_bits(a, 8) == generate_bits(b, 8));
    }
    {
        Substream s = rng.stream("bits");
        const auto bits = generate_bits(s, 1000000);
        double ones = 0;
        for (int b : bits) ones += b;
        const double frac = ones / 1e6;
        REQUIRE(frac > 0.497);
        REQUIRE(frac < 0.503);
    }
}

TEST_CASE("substreams are independent and seed-sensitive") {
    SeededRng rng(42);
    Substream bits1 = rng.stream("bits");
    const auto ref = generate_bits(bits1, 64);

    // Consuming from another named stream does not perturb this one.
    Substream ase = rng.stream("ase");
    for (int i = 0; i < 1000; ++i) ase.normal();
    Substream bits2 = rng.stream("bits");
    REQUIRE(generate_bits(bits2, 64) == ref);

    Substream other_trial = rng.stream("bits", 1);
    REQUIRE(generate_bits(other_trial, 64) != ref);
    SeededRng rng2(43);
    Substream other_seed = rng2.stream("bits");
    REQUIRE(generate_bits(other_seed, 64) != ref);
}

TEST_CASE("normal substream moments") {
    SeededRng rng(5);
    Substream s = rng.stream("ase");
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double v = s.normal();
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    REQUIRE(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(var == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("dBm/W conversion") {
    REQUIRE(dbm_to_watt(-3.0) == Catch::Approx(5.0119e-4).epsilon(1e-4));
    REQUIRE(watt_to_dbm(dbm_to_watt(-3.0)) == Catch::Approx(-3.0).margin(1e-12));
    REQUIRE(dbm_to_watt(0.0) == Catch::Approx(1e-3).margin(1e-15));
}

TEST_CASE("waveform_power: zero, unit, homogeneity, empty") {
    DualPolWaveform w(64, 32e9);
    REQUIRE(waveform_power(w) == 0.0);

    for (auto& v : w.x) v = cplx(1.0, 0.0);
    REQUIRE(waveform_power(w) == Catch::Approx(1.0).margin(1e-15));

    DualPolWaveform scaled = w;
    scale_waveform(scaled, 3.0);
    REQUIRE(waveform_power(scaled) == Catch::Approx(9.0 * waveform_power(w)).epsilon(1e-12));

    DualPolWaveform empty;
    REQUIRE_THROWS_AS(waveform_power(empty), std::invalid_argument);
}

TEST_CASE("pdl_jones: identity, diagonal, rotated example") {
    const JonesMatrix id = pdl_jones(0.3, 0.0);
    REQUIRE(std::abs(id.a - cplx(1, 0)) < 1e-12);
    REQUIRE(std::abs(id.b) < 1e-12);
    REQUIRE(std::abs(id.c) < 1e-12);
    REQUIRE(std::abs(id.d - cplx(1, 0)) < 1e-12);

    const JonesMatrix d = pdl_jones(0.0, 6.0206);
    REQUIRE(d.a.real() == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(d.d.real() == Catch::Approx(0.5).margin(1e-5));
    REQUIRE(std::abs(d.b) < 1e-12);

    const JonesMatrix r = pdl_jones(kPi / 4.0, 6.0206);
    const auto [ox, oy] = r.apply(cplx(1, 0), cplx(0, 0));
    REQUIRE(ox.real() == Catch::Approx(0.75).margin(2e-5));
    REQUIRE(oy.real() == Catch::Approx(0.25).margin(2e-5));

    REQUIRE_THROWS_AS(pdl_jones(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("cumulated_pdl_db: unitary, single section, aligned product") {
    REQUIRE(cumulated_pdl_db(JonesMatrix::rotation(0.7)) == Catch::Approx(0.0).margin(1e-9));
    for (double theta : {0.0, 0.4, 1.2}) {
        REQUIRE(cumulated_pdl_db(pdl_jones(theta, 2.5)) == Catch::Approx(2.5).margin(1e-9));
    }
    const JonesMatrix two = pdl_jones(0.0, 1.6) * pdl_jones(0.0, 1.6);
    REQUIRE(cumulated_pdl_db(two) == Catch::Approx(3.2).margin(1e-9));

    REQUIRE_THROWS_AS(cumulated_pdl_db(JonesMatrix::diag(cplx(1, 0), cplx(0, 0))),
                      std::invalid_argument);
}

TEST_CASE("random_sop_controller: unitarity and Haar marginal") {
    SeededRng rng(11);
    Substream s = rng.stream("sop");

    for (int i = 0; i < 50; ++i) {
        const JonesMatrix u = random_sop_controller(s);
        const JonesMatrix g = u.adjoint() * u;
        REQUIRE(std::abs(g.a - cplx(1, 0)) < 1e-12);
        REQUIRE(std::abs(g.b) < 1e-12);
        REQUIRE(std::abs(g.c) < 1e-12);
        REQUIRE(std::abs(g.d - cplx(1, 0)) < 1e-12);
        REQUIRE(cumulated_pdl_db(u) == Catch::Approx(0.0).margin(1e-9));
    }

    // |U11|^2 uniform on [0,1]: Kolmogorov-Smirnov at alpha = 0.01.
    const int n = 10000;
    std::vector<double> u11(n);
    for (auto& v : u11) v = std::norm(random_sop_controller(s).a);
    std::sort(u11.begin(), u11.end());
    double dmax = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = u11[static_cast<std::size_t>(i)];
        dmax = std::max(dmax, std::abs(cdf - static_cast<double>(i) / n));
        dmax = std::max(dmax, std::abs(cdf - static_cast<double>(i + 1) / n));
    }
    REQUIRE(dmax < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("apply_jones matches matrix action") {
    DualPolWaveform w(4, 1.0);
    w.x = {cplx(1, 0), cplx(0, 1), cplx(1, 1), cplx(2, -1)};
    w.y = {cplx(0, 0), cplx(1, 0), cplx(-1, 2), cplx(0.5, 0)};
    const JonesMatrix j = pdl_jones(0.3, 2.0);
    DualPolWaveform out = w;
    apply_jones(out, j);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto [ex, ey] = j.apply(w.x[i], w.y[i]);
        REQUIRE(std::abs(out.x[i] - ex) < 1e-14);
        REQUIRE(std::abs(out.y[i] - ey) < 1e-14);
    }
}
