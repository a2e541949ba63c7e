#ifndef PCTSIM_CODEC_HPP
#define PCTSIM_CODEC_HPP

#include <array>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pctsim/ofdm.hpp"

namespace pctsim {

/// Twin placement: conjugate pair on the orthogonal polarization
/// (lpc_pcts), on the adjacent time slot of the same polarization
/// (ltc_pcts), or no twin at all (uncoded_pdm reference).
enum class CodecMode { lpc_pcts, ltc_pcts, uncoded_pdm };

inline std::string to_string(CodecMode m) {
    switch (m) {
        case CodecMode::lpc_pcts: return "lpc_pcts";
        case CodecMode::ltc_pcts: return "ltc_pcts";
        case CodecMode::uncoded_pdm: return "uncoded_pdm";
    }
    return "?";
}

/// Linear code S = (A1 + 0.5*A2) / sqrt(1.25): one QPSK symbol at full
/// amplitude plus one at half amplitude, normalized to unit average power.
inline cplx linear_code(cplx a1, cplx a2) {
    constexpr double inv_norm = 0.89442719099991587856;  // 1/sqrt(1.25)
    return (a1 + 0.5 * a2) * inv_norm;
}

/**
 * @brief The 16-point coded constellation and its look-up-table decoder.
 *
 * Point index i enumerates the bit quadruple (A1 bits, A2 bits) as
 * i = b0<<3 | b1<<2 | b2<<1 | b3 with A1 = qpsk(b0,b1), A2 = qpsk(b2,b3).
 * The points form a uniform 4x4 grid with rail levels +-g and +-3g,
 * g = 1/sqrt(10). ML ties resolve to the lowest index.
 */
struct CodedConstellation {
    std::array<cplx, 16> points;

    static CodedConstellation standard() {
        CodedConstellation c;
        for (int i = 0; i < 16; ++i) {
            const cplx a1 = qpsk_point((i >> 3) & 1, (i >> 2) & 1);
            const cplx a2 = qpsk_point((i >> 1) & 1, i & 1);
            c.points[static_cast<std::size_t>(i)] = linear_code(a1, a2);
        }
        return c;
    }

    /// Bits (A1 then A2) for a point index.
    static std::array<int, 4> lut_bits(int index) {
        return {(index >> 3) & 1, (index >> 2) & 1, (index >> 1) & 1, index & 1};
    }

    int nearest(cplx r) const {
        int best = 0;
        double best_d = std::norm(r - points[0]);
        for (int i = 1; i < 16; ++i) {
            const double d = std::norm(r - points[static_cast<std::size_t>(i)]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    /// CSV table (index, real, imag, bits) for documentation and tests.
    void dump_csv(std::ostream& os) const {
        os << "index,real,imag,a1_bits,a2_bits\n";
        for (int i = 0; i < 16; ++i) {
            const auto b = lut_bits(i);
            const cplx p = points[static_cast<std::size_t>(i)];
            os << i << ',' << p.real() << ',' << p.imag() << ',' << b[0] << b[1] << ',' << b[2] << b[3]
               << '\n';
        }
    }
};

namespace codec_detail {

inline void fill_common(OfdmSymbolGrid& g, const SubcarrierLayout& lay) {
    for (std::size_t bin : lay.pilot_bins) {
        g.x[bin] = kPilotSymbol;
        g.y[bin] = kPilotSymbol;
    }
}

}  // namespace codec_detail

/**
 * @brief LPC-PCTS encoder for one OFDM symbol.
 *
 * Two consecutive payload QPSK symbols feed each coded data subcarrier:
 * X_k = (A_{2k} + 0.5 A_{2k+1}) / sqrt(1.25), and the conjugate twin
 * Y_k = X_k* rides on the orthogonal polarization.
 */
inline OfdmSymbolGrid lpc_encode(const std::vector<cplx>& payload, const SubcarrierLayout& lay) {
    if (payload.size() != 2 * lay.data_bins.size())
        throw std::invalid_argument("lpc_encode: payload length must be 2 x data subcarriers");
    OfdmSymbolGrid g(lay.fft_size);
    for (std::size_t k = 0; k < lay.data_bins.size(); ++k) {
        const cplx s = linear_code(payload[2 * k], payload[2 * k + 1]);
        g.x[lay.data_bins[k]] = s;
        g.y[lay.data_bins[k]] = std::conj(s);
    }
    codec_detail::fill_common(g, lay);
    return g;
}

/**
 * @brief LTC-PCTS encoder for one pair of OFDM symbols (slots t and t+T).
 *
 * Slot t carries independent coded streams on X and Y; slot t+T carries
 * their elementwise conjugates on the same polarization.
 */
inline std::pair<OfdmSymbolGrid, OfdmSymbolGrid> ltc_encode(const std::vector<cplx>& payload_x,
                                                            const std::vector<cplx>& payload_y,
                                                            const SubcarrierLayout& lay) {
    const std::size_t need = 2 * lay.data_bins.size();
    if (payload_x.size() != need || payload_y.size() != need)
        throw std::invalid_argument("ltc_encode: payload length must be 2 x data subcarriers per rail");
    OfdmSymbolGrid t(lay.fft_size), twin(lay.fft_size);
    for (std::size_t k = 0; k < lay.data_bins.size(); ++k) {
        const std::size_t bin = lay.data_bins[k];
        const cplx sx = linear_code(payload_x[2 * k], payload_x[2 * k + 1]);
        const cplx sy = linear_code(payload_y[2 * k], payload_y[2 * k + 1]);
        t.x[bin] = sx;
        t.y[bin] = sy;
        twin.x[bin] = std::conj(sx);
        twin.y[bin] = std::conj(sy);
    }
    codec_detail::fill_common(t, lay);
    codec_detail::fill_common(twin, lay);
    return {std::move(t), std::move(twin)};
}

/// Plain PDM-QPSK reference: one QPSK symbol per polarization per data
/// subcarrier, no twin.
inline OfdmSymbolGrid uncoded_pdm_reference(const std::vector<cplx>& payload_x,
                                            const std::vector<cplx>& payload_y,
                                            const SubcarrierLayout& lay) {
    if (payload_x.size() != lay.data_bins.size() || payload_y.size() != lay.data_bins.size())
        throw std::invalid_argument("uncoded_pdm_reference: payload length must equal data subcarriers");
    OfdmSymbolGrid g(lay.fft_size);
    for (std::size_t k = 0; k < lay.data_bins.size(); ++k) {
        g.x[lay.data_bins[k]] = payload_x[k];
        g.y[lay.data_bins[k]] = payload_y[k];
    }
    codec_detail::fill_common(g, lay);
    return g;
}

/// Receiver-side coherent superposition R_k = (B_main,k + B_twin,k*) / 2
/// over per-data-subcarrier symbol vectors. Anti-correlated first-order
/// distortions cancel; independent noise variance halves.
inline std::vector<cplx> coherent_superpose(const std::vector<cplx>& main, const std::vector<cplx>& twin) {
    if (main.size() != twin.size()) throw std::invalid_argument("coherent_superpose: size mismatch");
    std::vector<cplx> r(main.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.5 * (main[i] + std::conj(twin[i]));
    return r;
}

struct MlDecodeResult {
    std::vector<int> bits;        // 4 bits per recovered symbol: A1 then A2
    std::vector<cplx> a1;         // decoded QPSK pair, full-amplitude branch
    std::vector<cplx> a2;         // decoded QPSK pair, half-amplitude branch
};

/// Symbol-by-symbol maximum-likelihood detection over the 16 coded points,
/// followed by the look-up-table mapping back to QPSK bit pairs.
inline MlDecodeResult ml_decode(const std::vector<cplx>& recovered, const CodedConstellation& con) {
    MlDecodeResult out;
    out.bits.reserve(recovered.size() * 4);
    out.a1.reserve(recovered.size());
    out.a2.reserve(recovered.size());
    for (cplx r : recovered) {
        const int idx = con.nearest(r);
        const auto b = CodedConstellation::lut_bits(idx);
        out.bits.insert(out.bits.end(), b.begin(), b.end());
        out.a1.push_back(qpsk_point(b[0], b[1]));
        out.a2.push_back(qpsk_point(b[2], b[3]));
    }
    return out;
}

/// Gather the per-data-subcarrier symbols of one rail.
inline std::vector<cplx> extract_data(const std::vector<cplx>& rail, const SubcarrierLayout& lay) {
    std::vector<cplx> out(lay.data_bins.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = rail[lay.data_bins[k]];
    return out;
}

/// Payload bits consumed per OFDM symbol slot (all modes carry 4 bits per
/// data subcarrier per dual-polarization slot).
inline std::size_t payload_bits_per_symbol(const SubcarrierLayout& lay) { return 4 * lay.data_bins.size(); }

}  // namespace pctsim

#endif
