#include "binsonar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binsonar/error.hpp"

namespace binsonar {

namespace detail {

void power_spectrum_row(const Fft& plan, std::span<const double> frame, std::span<double> out,
                        std::vector<std::complex<double>>& scratch) {
    const auto n = plan.size();
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) scratch[i] = {frame[i], 0.0};
    plan.forward(scratch);
    for (std::size_t k = 0; k <= n / 2; ++k) out[k] = std::norm(scratch[k]);
}

std::vector<double> bin_frequencies(std::size_t n_fft, double sr) {
    std::vector<double> hz(n_fft / 2 + 1);
    for (std::size_t k = 0; k < hz.size(); ++k) hz[k] = static_cast<double>(k) * sr / static_cast<double>(n_fft);
    return hz;
}

double cqt_bin_power(std::span<const double> samples, const CqtKernelSet& k, std::size_t bin, std::size_t centre) {
    const auto n = static_cast<std::ptrdiff_t>(k.lengths[bin]);
    const auto len = static_cast<std::ptrdiff_t>(samples.size());
    const auto start = static_cast<std::ptrdiff_t>(centre) - n / 2;
    const auto u_lo = std::max<std::ptrdiff_t>(0, -start);
    const auto u_hi = std::min<std::ptrdiff_t>(n, len - start);
    const double* re = k.re[bin].data();
    const double* im = k.im[bin].data();
    const double* x = samples.data() + start;
    double acc_re = 0.0;
    double acc_im = 0.0;
    for (std::ptrdiff_t u = u_lo; u < u_hi; ++u) {
        acc_re += x[u] * re[u];
        acc_im += x[u] * im[u];
    }
    const double nn = static_cast<double>(n);
    return (acc_re * acc_re + acc_im * acc_im) / (nn * nn);
}

}  // namespace detail

Spectrogram stft_power(const Grid& frames, double sr) {
    if (!is_power_of_two(frames.cols))
        throw InvalidArgument("STFT frame length must be a power of two, got " + std::to_string(frames.cols));
    const Fft plan(frames.cols);
    Spectrogram s{Grid(frames.rows, frames.cols / 2 + 1), detail::bin_frequencies(frames.cols, sr)};
#pragma omp parallel
    {
        std::vector<std::complex<double>> scratch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(frames.rows); ++m) {
            const auto r = static_cast<std::size_t>(m);
            detail::power_spectrum_row(plan, frames.row(r), s.power.row(r), scratch);
        }
    }
    return s;
}

Spectrogram stft_power(const Signal& sig, const FrameParams& p, double sr) {
    p.validate();
    if (!is_power_of_two(p.frame_len))
        throw InvalidArgument("STFT frame length must be a power of two, got " + std::to_string(p.frame_len));
    if (sig.samples.empty()) throw InvalidArgument("cannot frame an empty signal");
    const Fft plan(p.frame_len);
    const auto window = p.window();
    const auto count = p.frame_count(sig.samples.size());
    Spectrogram s{Grid(count, p.frame_len / 2 + 1), detail::bin_frequencies(p.frame_len, sr)};
#pragma omp parallel
    {
        std::vector<double> frame(p.frame_len);
        std::vector<std::complex<double>> scratch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(count); ++m) {
            const auto r = static_cast<std::size_t>(m);
            extract_frame(sig.samples, p, window, r, frame);
            detail::power_spectrum_row(plan, frame, s.power.row(r), scratch);
        }
    }
    return s;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank build_mel_filterbank(double sr, std::size_t n_fft, std::size_t n_mels, double fmin, double fmax) {
    if (n_mels < 1) throw InvalidArgument("mel filterbank needs at least one filter");
    if (n_fft < 2) throw InvalidArgument("mel filterbank needs n_fft >= 2");
    if (!(fmin >= 0.0 && fmin < fmax && fmax <= sr / 2))
        throw InvalidArgument("mel filterbank requires 0 <= fmin < fmax <= sr/2");

    MelFilterbank fb;
    fb.sr = sr;
    fb.fmin = fmin;
    fb.fmax = fmax;
    fb.n_fft = n_fft;
    fb.weights = Grid(n_mels, n_fft / 2 + 1);

    const double mel_lo = hz_to_mel(fmin);
    const double mel_hi = hz_to_mel(fmax);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));

    const auto bin_hz = detail::bin_frequencies(n_fft, sr);
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double lo = edges[m];
        const double mid = edges[m + 1];
        const double hi = edges[m + 2];
        const double norm = 2.0 / (hi - lo);
        fb.center_hz.push_back(mid);
        std::size_t first = bin_hz.size();
        std::size_t last = 0;
        for (std::size_t k = 0; k < bin_hz.size(); ++k) {
            const double rising = (bin_hz[k] - lo) / (mid - lo);
            const double falling = (hi - bin_hz[k]) / (hi - mid);
            const double w = std::max(0.0, std::min(rising, falling));
            if (w > 0.0) {
                fb.weights(m, k) = w * norm;
                first = std::min(first, k);
                last = k + 1;
            }
        }
        fb.support.emplace_back(first < last ? first : 0, first < last ? last : 0);
    }
    return fb;
}

Grid apply_mel(const Spectrogram& s, const MelFilterbank& fb) {
    if (s.power.cols != fb.n_bins())
        throw InvalidArgument("mel filterbank expects " + std::to_string(fb.n_bins()) + " bins, spectrogram has " +
                              std::to_string(s.power.cols));
    Grid out(s.power.rows, fb.n_mels());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(s.power.rows); ++f) {
        const auto frame = s.power.row(static_cast<std::size_t>(f));
        auto dst = out.row(static_cast<std::size_t>(f));
        for (std::size_t m = 0; m < fb.n_mels(); ++m) {
            const auto w = fb.weights.row(m);
            double acc = 0.0;
            for (std::size_t k = fb.support[m].first; k < fb.support[m].second; ++k) acc += w[k] * frame[k];
            dst[m] = acc;
        }
    }
    return out;
}

Grid power_to_db(const Grid& power, double amin, double top_db) {
    Grid db(power.rows, power.cols);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < power.data.size(); ++i) {
        db.data[i] = 10.0 * std::log10(std::max(power.data[i], amin));
        peak = std::max(peak, db.data[i]);
    }
    const double floor = peak - top_db;
    for (auto& v : db.data) v = std::max(v, floor);
    return db;
}

DctII::DctII(std::size_t n, std::size_t keep) : basis_(keep, n) {
    if (n == 0 || keep < 1 || keep > n)
        throw InvalidArgument("DCT-II requires 1 <= keep <= n, got keep=" + std::to_string(keep) +
                              " n=" + std::to_string(n));
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < keep; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
        for (std::size_t j = 0; j < n; ++j)
            basis_(k, j) = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(j) + 1.0) /
                                            (2.0 * nn));
    }
}

void DctII::apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != basis_.cols || out.size() != basis_.rows) throw InvalidArgument("DCT-II size mismatch");
    for (std::size_t k = 0; k < basis_.rows; ++k) {
        const auto b = basis_.row(k);
        double acc = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) acc += b[j] * in[j];
        out[k] = acc;
    }
}

std::vector<double> dct_ii(std::span<const double> v, std::size_t keep) {
    const DctII dct(v.size(), keep);
    std::vector<double> out(keep);
    dct.apply(v, out);
    return out;
}

namespace {

void push_kernel(CqtKernelSet& k, double f, std::size_t n) {
    const auto w = hann_window(n);
    std::vector<double> re(n);
    std::vector<double> im(n);
    for (std::size_t u = 0; u < n; ++u) {
        const double phase = -2.0 * std::numbers::pi * k.q * static_cast<double>(u) / static_cast<double>(n);
        re[u] = w[u] * std::cos(phase);
        im[u] = w[u] * std::sin(phase);
    }
    k.freqs.push_back(f);
    k.lengths.push_back(n);
    k.re.push_back(std::move(re));
    k.im.push_back(std::move(im));
}

}  // namespace

CqtKernelSet build_cqt_kernels(double sr, double fmin, int bins_per_octave, std::size_t n_bins, std::size_t max_len) {
    if (bins_per_octave < 1 || n_bins < 1 || fmin <= 0.0 || max_len < 1)
        throw InvalidArgument("invalid constant-Q parameters");
    CqtKernelSet k;
    k.sr = sr;
    k.fmin = fmin;
    k.bins_per_octave = bins_per_octave;
    k.q = 1.0 / (std::exp2(1.0 / bins_per_octave) - 1.0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        const double f = fmin * std::exp2(static_cast<double>(b) / bins_per_octave);
        if (f >= sr / 2) throw InvalidArgument("constant-Q bin above Nyquist");
        push_kernel(k, f, std::min(static_cast<std::size_t>(std::ceil(k.q * sr / f)), max_len));
    }
    return k;
}

CqtKernelSet clip_cqt_kernels(const CqtKernelSet& full, std::size_t max_len) {
    if (max_len < 1) throw InvalidArgument("invalid constant-Q parameters");
    CqtKernelSet k;
    k.sr = full.sr;
    k.fmin = full.fmin;
    k.bins_per_octave = full.bins_per_octave;
    k.q = full.q;
    for (std::size_t b = 0; b < full.n_bins(); ++b) {
        if (full.lengths[b] <= max_len) {
            k.freqs.push_back(full.freqs[b]);
            k.lengths.push_back(full.lengths[b]);
            k.re.push_back(full.re[b]);
            k.im.push_back(full.im[b]);
        } else {
            push_kernel(k, full.freqs[b], max_len);
        }
    }
    return k;
}

Grid cqt_power(const Signal& s, const CqtKernelSet& kernels, std::size_t hop) {
    if (hop == 0) throw InvalidArgument("hop must be positive");
    const auto count = 1 + s.samples.size() / hop;
    Grid out(count, kernels.n_bins());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(count); ++m) {
        const auto r = static_cast<std::size_t>(m);
        for (std::size_t b = 0; b < kernels.n_bins(); ++b)
            out(r, b) = detail::cqt_bin_power(s.samples, kernels, b, r * hop);
    }
    return out;
}

}  // namespace binsonar
