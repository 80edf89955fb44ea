#include "binsonar/signal.hpp"

#include <cmath>
#include <numbers>

#include "binsonar/error.hpp"

namespace binsonar {

void FrameParams::validate() const {
    if (frame_len == 0 || hop == 0 || hop > frame_len)
        throw InvalidArgument("frame parameters require 0 < hop <= frame_len");
}

std::vector<double> FrameParams::window() const { return hann_window(frame_len); }

std::size_t FrameParams::frame_count(std::size_t n_samples) const {
    if (center) return 1 + n_samples / hop;
    if (n_samples < frame_len) return 0;
    return 1 + (n_samples - frame_len) / hop;
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k)
        w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    return w;
}

Signal bytes_to_signal(std::span<const std::uint8_t> bytes, int bytes_per_sample, std::size_t min_len) {
    if (bytes.empty()) throw InvalidArgument("cannot build a signal from empty input");
    if (bytes_per_sample != 1 && bytes_per_sample != 2 && bytes_per_sample != 4)
        throw InvalidArgument("bytes_per_sample must be 1, 2 or 4");

    const auto width = static_cast<std::size_t>(bytes_per_sample);
    const std::size_t n = bytes.size() / width;
    const double half = std::ldexp(1.0, 8 * bytes_per_sample - 1);

    Signal s;
    s.source_len = bytes.size();
    s.bytes_per_sample = bytes_per_sample;
    s.samples.assign(std::max(n, min_len), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t v = 0;
        for (std::size_t b = 0; b < width; ++b) v |= static_cast<std::uint64_t>(bytes[i * width + b]) << (8 * b);
        s.samples[i] = (static_cast<double>(v) - half) / half;
    }
    return s;
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    std::ptrdiff_t r = i % period;
    if (r < 0) r += period;
    if (r >= static_cast<std::ptrdiff_t>(n)) r = period - r;
    return static_cast<std::size_t>(r);
}

void extract_frame(std::span<const double> samples, const FrameParams& p, std::span<const double> window,
                   std::size_t m, std::span<double> out) {
    const auto n = samples.size();
    const auto offset = p.center ? static_cast<std::ptrdiff_t>(p.frame_len / 2) : 0;
    const auto start = static_cast<std::ptrdiff_t>(m * p.hop) - offset;
    for (std::size_t k = 0; k < p.frame_len; ++k) {
        const auto idx = start + static_cast<std::ptrdiff_t>(k);
        const double v = (idx >= 0 && idx < static_cast<std::ptrdiff_t>(n))
                             ? samples[static_cast<std::size_t>(idx)]
                             : samples[reflect_index(idx, n)];
        out[k] = v * window[k];
    }
}

Grid frame_signal(const Signal& s, const FrameParams& p) {
    p.validate();
    if (s.samples.empty()) throw InvalidArgument("cannot frame an empty signal");
    const auto window = p.window();
    const auto count = p.frame_count(s.samples.size());
    Grid frames(count, p.frame_len);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(count); ++m)
        extract_frame(s.samples, p, window, static_cast<std::size_t>(m), frames.row(static_cast<std::size_t>(m)));
    return frames;
}

}  // namespace binsonar
