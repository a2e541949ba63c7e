#ifndef PCTSIM_JONES_HPP
#define PCTSIM_JONES_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

#include "pctsim/constants.hpp"
#include "pctsim/rng.hpp"
#include "pctsim/waveform.hpp"

namespace pctsim {

/**
 * @brief 2x2 complex field transfer matrix [[a, b], [c, d]].
 *
 * Represents PDL elements, polarization rotations and SOP controllers.
 */
struct JonesMatrix {
    cplx a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

    static JonesMatrix identity() { return {}; }

    /// R(theta) = [[cos, -sin], [sin, cos]].
    static JonesMatrix rotation(double theta) {
        const double ct = std::cos(theta), st = std::sin(theta);
        return {cplx(ct, 0), cplx(-st, 0), cplx(st, 0), cplx(ct, 0)};
    }

    static JonesMatrix diag(cplx u, cplx v) { return {u, cplx(0, 0), cplx(0, 0), v}; }

    JonesMatrix operator*(const JonesMatrix& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }

    JonesMatrix adjoint() const {
        return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
    }

    std::pair<cplx, cplx> apply(cplx x, cplx y) const { return {a * x + b * y, c * x + d * y}; }
};

/// Singular values (max, min) from the eigenvalues of J^H J.
inline std::pair<double, double> singular_values(const JonesMatrix& j) {
    // J^H J is hermitian positive semidefinite; closed-form 2x2 eigenvalues.
    const double p = std::norm(j.a) + std::norm(j.c);
    const double q = std::norm(j.b) + std::norm(j.d);
    const cplx r = std::conj(j.a) * j.b + std::conj(j.c) * j.d;
    const double tr_half = 0.5 * (p + q);
    const double disc = std::sqrt(std::max(0.0, 0.25 * (p - q) * (p - q) + std::norm(r)));
    const double lmax = tr_half + disc;
    const double lmin = std::max(0.0, tr_half - disc);
    return {std::sqrt(lmax), std::sqrt(lmin)};
}

/// PDL element rotated by theta: R(theta) diag(1, alpha) R(-theta),
/// alpha = 10^(-rho_db/20) applied to the field.
inline JonesMatrix pdl_jones(double theta, double rho_db) {
    if (rho_db < 0.0) throw std::invalid_argument("pdl_jones: rho_db must be >= 0");
    const double alpha = db_to_field(rho_db);
    return JonesMatrix::rotation(theta) * JonesMatrix::diag(cplx(1.0, 0.0), cplx(alpha, 0.0)) *
           JonesMatrix::rotation(-theta);
}

/// Cumulated PDL in dB: 20 log10(sigma_max / sigma_min).
inline double cumulated_pdl_db(const JonesMatrix& j) {
    const auto [smax, smin] = singular_values(j);
    if (smin <= 0.0 || !std::isfinite(smax / smin))
        throw std::invalid_argument("cumulated_pdl_db: singular matrix");
    return 20.0 * std::log10(smax / smin);
}

/// Haar-uniform SU(2) element. |U11|^2 is uniform on [0,1], the phases
/// are uniform on [0,2pi).
inline JonesMatrix random_sop_controller(Substream& rng) {
    const double u = rng.uniform();
    const double cos_eta = std::sqrt(u);
    const double sin_eta = std::sqrt(1.0 - u);
    const double phi1 = rng.uniform_range(0.0, 2.0 * kPi);
    const double phi2 = rng.uniform_range(0.0, 2.0 * kPi);
    return {std::polar(cos_eta, phi1), std::polar(sin_eta, phi2),
            -std::polar(sin_eta, -phi2), std::polar(cos_eta, -phi1)};
}

inline void apply_jones(DualPolWaveform& w, const JonesMatrix& j) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        const cplx x = w.x[i], y = w.y[i];
        w.x[i] = j.a * x + j.b * y;
        w.y[i] = j.c * x + j.d * y;
    }
}

}  // namespace pctsim

#endif
