#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "binsonar/grid.hpp"

namespace binsonar {

constexpr std::size_t kDefaultFrameLength = 2048;
constexpr std::size_t kDefaultHop = 512;

/// A file's bytes read as a one-dimensional signal in [-1, 1).
struct Signal {
    std::vector<double> samples;
    std::size_t source_len = 0;
    int bytes_per_sample = 1;
};

/// Framing convention: periodic Hann window, reflect padding of
/// frame_len/2 on both sides when `center` is set.
struct FrameParams {
    std::size_t frame_len = kDefaultFrameLength;
    std::size_t hop = kDefaultHop;
    bool center = true;

    /// Throws InvalidArgument unless 0 < hop <= frame_len.
    void validate() const;
    std::vector<double> window() const;
    std::size_t frame_count(std::size_t n_samples) const;
};

/// Periodic Hann window w[k] = 0.5 - 0.5 cos(2 pi k / n).
std::vector<double> hann_window(std::size_t n);

/// Decodes little-endian unsigned groups of `bytes_per_sample` bytes to
/// (v - 2^(8B-1)) / 2^(8B-1). A trailing partial group is dropped and short
/// results are zero-padded up to `min_len`.
Signal bytes_to_signal(std::span<const std::uint8_t> bytes, int bytes_per_sample,
                       std::size_t min_len = kDefaultFrameLength);

/// Maps an arbitrary index into [0, n) by mirror reflection without
/// repeating the edge sample (numpy "reflect").
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

/// Writes windowed frame `m` of `samples` into `out` (length frame_len).
void extract_frame(std::span<const double> samples, const FrameParams& p, std::span<const double> window,
                   std::size_t m, std::span<double> out);

/// All windowed frames, one per row.
Grid frame_signal(const Signal& s, const FrameParams& p = {});

}  // namespace binsonar
