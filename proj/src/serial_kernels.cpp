// Single-threaded reference versions of the parallel kernels. They keep the
// plain loop structure (dense filter rows, bounds checks in the CQT inner
// product) and must stay bit-identical to the optimized versions.
#include <cmath>

#include "binsonar/error.hpp"
#include "binsonar/spectral.hpp"

namespace binsonar::serial {

Spectrogram stft_power(const Grid& frames, double sr) {
    if (!is_power_of_two(frames.cols))
        throw InvalidArgument("STFT frame length must be a power of two, got " + std::to_string(frames.cols));
    const Fft plan(frames.cols);
    Spectrogram s{Grid(frames.rows, frames.cols / 2 + 1), detail::bin_frequencies(frames.cols, sr)};
    std::vector<std::complex<double>> scratch;
    for (std::size_t m = 0; m < frames.rows; ++m) detail::power_spectrum_row(plan, frames.row(m), s.power.row(m), scratch);
    return s;
}

Grid apply_mel(const Spectrogram& s, const MelFilterbank& fb) {
    if (s.power.cols != fb.n_bins()) throw InvalidArgument("mel filterbank / spectrogram bin mismatch");
    Grid out(s.power.rows, fb.n_mels());
    for (std::size_t f = 0; f < s.power.rows; ++f) {
        for (std::size_t m = 0; m < fb.n_mels(); ++m) {
            double acc = 0.0;
            for (std::size_t k = 0; k < fb.n_bins(); ++k) {
                const double w = fb.weights(m, k);
                if (w != 0.0) acc += w * s.power(f, k);
            }
            out(f, m) = acc;
        }
    }
    return out;
}

Grid cqt_power(const Signal& s, const CqtKernelSet& kernels, std::size_t hop) {
    if (hop == 0) throw InvalidArgument("hop must be positive");
    const auto len = static_cast<std::ptrdiff_t>(s.samples.size());
    const auto count = 1 + s.samples.size() / hop;
    Grid out(count, kernels.n_bins());
    for (std::size_t m = 0; m < count; ++m) {
        for (std::size_t b = 0; b < kernels.n_bins(); ++b) {
            const auto n = static_cast<std::ptrdiff_t>(kernels.lengths[b]);
            const auto start = static_cast<std::ptrdiff_t>(m * hop) - n / 2;
            double acc_re = 0.0;
            double acc_im = 0.0;
            for (std::ptrdiff_t u = 0; u < n; ++u) {
                const auto idx = start + u;
                if (idx < 0 || idx >= len) continue;
                acc_re += s.samples[static_cast<std::size_t>(idx)] * kernels.re[b][static_cast<std::size_t>(u)];
                acc_im += s.samples[static_cast<std::size_t>(idx)] * kernels.im[b][static_cast<std::size_t>(u)];
            }
            const double nn = static_cast<double>(n);
            out(m, b) = (acc_re * acc_re + acc_im * acc_im) / (nn * nn);
        }
    }
    return out;
}

}  // namespace binsonar::serial
