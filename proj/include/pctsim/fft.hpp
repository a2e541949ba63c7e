#ifndef PCTSIM_FFT_HPP
#define PCTSIM_FFT_HPP

#include <fftw3.h>

#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "pctsim/constants.hpp"

namespace pctsim {

/**
 * @brief Unnormalized in-place complex FFT backed by FFTW.
 *
 * forward: X_k = sum_n x_n e^{-j 2 pi k n / N};  inverse: conjugate kernel.
 * Plans are cached per size and created with FFTW_ESTIMATE so the chosen
 * algorithm (and therefore rounding) is reproducible run to run. Execution
 * is thread-safe; plan creation is serialized internally.
 */
class Fft {
public:
    static void forward(std::vector<cplx>& data) { execute(data, FFTW_FORWARD); }
    static void inverse(std::vector<cplx>& data) { execute(data, FFTW_BACKWARD); }

    static std::size_t next_pow2(std::size_t n) {
        std::size_t p = 1;
        while (p < n) p <<= 1;
        return p;
    }

    static bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

    /// Baseband frequency (Hz) of bin k on an N-point grid at rate fs.
    static double bin_frequency(std::size_t k, std::size_t n, double fs) {
        const auto kk = static_cast<long long>(k);
        const auto nn = static_cast<long long>(n);
        const long long signed_k = (kk <= nn / 2 - 1 || nn == 1) ? kk : kk - nn;
        return static_cast<double>(signed_k) * fs / static_cast<double>(n);
    }

private:
    static void execute(std::vector<cplx>& data, int sign) {
        if (data.empty()) throw std::invalid_argument("fft: empty input");
        auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan(data.size(), sign), ptr, ptr);
    }

    static fftw_plan plan(std::size_t n, int sign) {
        static std::mutex mtx;
        static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find({n, sign});
        if (it != cache.end()) return it->second;
        std::vector<cplx> scratch(n);
        auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), ptr, ptr, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fft: planning failed");
        cache.emplace(std::make_pair(n, sign), p);
        return p;
    }
};

}  // namespace pctsim

#endif
