#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "binsonar/fft.hpp"
#include "binsonar/grid.hpp"
#include "binsonar/signal.hpp"

namespace binsonar {

/// Nominal rate used to give byte-signals a frequency axis.
constexpr double kSampleRate = 22050.0;
constexpr std::size_t kMelBands = 128;
constexpr double kCqtFmin = 32.703;  // C1
constexpr int kCqtBinsPerOctave = 12;
constexpr std::size_t kCqtBins = 84;

/// Power spectrogram: rows are frames, columns are bins 0..n/2.
struct Spectrogram {
    Grid power;
    std::vector<double> bin_hz;
};

Spectrogram stft_power(const Grid& frames, double sr = kSampleRate);

/// Same result as stft_power(frame_signal(s, p)) without materializing the
/// frame grid.
Spectrogram stft_power(const Signal& s, const FrameParams& p, double sr = kSampleRate);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters with edges equally spaced on the mel scale, each
/// scaled by 2 / (f_hi - f_lo).
struct MelFilterbank {
    Grid weights;  // n_mels x (n_fft/2 + 1)
    double sr = kSampleRate;
    double fmin = 0.0;
    double fmax = kSampleRate / 2;
    std::size_t n_fft = 0;
    std::vector<double> center_hz;
    /// Half-open nonzero column range of each filter.
    std::vector<std::pair<std::size_t, std::size_t>> support;

    std::size_t n_mels() const { return weights.rows; }
    std::size_t n_bins() const { return weights.cols; }
};

MelFilterbank build_mel_filterbank(double sr, std::size_t n_fft, std::size_t n_mels, double fmin, double fmax);

/// Mel power grid, n_frames x n_mels.
Grid apply_mel(const Spectrogram& s, const MelFilterbank& fb);

/// 10 log10(max(x, amin)), floor-clipped at (grid max - top_db).
Grid power_to_db(const Grid& power, double amin = 1e-10, double top_db = 80.0);

/// Orthonormal DCT-II truncated to the first `keep` coefficients.
class DctII {
public:
    DctII(std::size_t n, std::size_t keep);

    std::size_t input_size() const { return basis_.cols; }
    std::size_t output_size() const { return basis_.rows; }

    void apply(std::span<const double> in, std::span<double> out) const;
    const Grid& basis() const { return basis_; }

private:
    Grid basis_;  // keep x n
};

std::vector<double> dct_ii(std::span<const double> v, std::size_t keep);

/// Hann-windowed complex exponential kernels, one per geometrically spaced bin.
struct CqtKernelSet {
    double sr = kSampleRate;
    double fmin = kCqtFmin;
    int bins_per_octave = kCqtBinsPerOctave;
    double q = 0.0;
    std::vector<double> freqs;
    std::vector<std::size_t> lengths;
    std::vector<std::vector<double>> re;  // w[u] cos(-2 pi Q u / N)
    std::vector<std::vector<double>> im;  // w[u] sin(-2 pi Q u / N)

    std::size_t n_bins() const { return freqs.size(); }
};

/// Kernel lengths are ceil(Q sr / f_k), clipped to `max_len`.
CqtKernelSet build_cqt_kernels(double sr = kSampleRate, double fmin = kCqtFmin,
                               int bins_per_octave = kCqtBinsPerOctave, std::size_t n_bins = kCqtBins,
                               std::size_t max_len = std::numeric_limits<std::size_t>::max());

/// Same result as rebuilding `full` with a smaller `max_len`, but only the
/// kernels that actually shrink are recomputed.
CqtKernelSet clip_cqt_kernels(const CqtKernelSet& full, std::size_t max_len);

/// Direct windowed inner products centred on t = m * hop; out-of-range
/// samples read as zero. Each value is |sum|^2 / N_k^2.
Grid cqt_power(const Signal& s, const CqtKernelSet& kernels, std::size_t hop = kDefaultHop);

/// Single-threaded reference kernels kept for testing and benchmarking the
/// parallel versions. Results match the parallel kernels bit for bit.
namespace serial {

Spectrogram stft_power(const Grid& frames, double sr = kSampleRate);
Grid apply_mel(const Spectrogram& s, const MelFilterbank& fb);
Grid cqt_power(const Signal& s, const CqtKernelSet& kernels, std::size_t hop = kDefaultHop);

}  // namespace serial

namespace detail {

void power_spectrum_row(const Fft& plan, std::span<const double> frame, std::span<double> out,
                        std::vector<std::complex<double>>& scratch);
std::vector<double> bin_frequencies(std::size_t n_fft, double sr);
double cqt_bin_power(std::span<const double> samples, const CqtKernelSet& k, std::size_t bin, std::size_t centre);

}  // namespace detail

}  // namespace binsonar
