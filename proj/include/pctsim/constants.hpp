#ifndef PCTSIM_CONSTANTS_HPP
#define PCTSIM_CONSTANTS_HPP

#include <cmath>
#include <complex>

namespace pctsim {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPlanck = 6.62607015e-34;     // J*s
inline constexpr double kLightSpeed = 299792458.0;    // m/s
inline constexpr double kRefWavelength = 1550e-9;     // m, SSMF operating point
inline constexpr double kDefaultCarrierHz = 193.41e12;

/// Power conversions. All internal powers are watts; dBm appears only at
/// config and report boundaries.
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Field transmission coefficient of a loss element quoted in dB
/// (rho = -20*log10(alpha), alpha applied to the field amplitude).
inline double db_to_field(double db) { return std::pow(10.0, -db / 20.0); }

/// beta2 (s^2/m) from a dispersion parameter quoted in ps/nm/km.
inline double beta2_from_dispersion(double d_ps_nm_km, double wavelength_m = kRefWavelength) {
    const double d_si = d_ps_nm_km * 1e-6;  // s/m^2
    return -d_si * wavelength_m * wavelength_m / (2.0 * kPi * kLightSpeed);
}

}  // namespace pctsim

#endif
