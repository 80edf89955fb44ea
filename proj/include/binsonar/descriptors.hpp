#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "binsonar/grid.hpp"
#include "binsonar/spectral.hpp"

namespace binsonar {

enum class DescriptorKind { Mfcc, MelSpec, ChromaStft, ChromaCqt, ChromaCens };

constexpr std::size_t kMfccCoefficients = 20;
constexpr std::size_t kChromaBins = 12;

struct DescriptorConfig {
    DescriptorKind kind = DescriptorKind::Mfcc;
    bool expanded = false;
    /// Segment count for expanded vectors; 0 selects the per-kind default
    /// (MFCC 16, mel spectrogram 3, chroma 26).
    std::size_t segments = 0;
    int bytes_per_sample = 1;

    std::size_t base_dim() const;
    std::size_t segment_count() const;
    std::size_t dim() const;
    /// Name stored in feature matrices, e.g. "mfcc", "mfcc-e16", "chroma-cqt-bps2".
    std::string feature_name() const;
    void validate() const;
};

std::size_t base_dim(DescriptorKind kind);
std::size_t default_segments(DescriptorKind kind);
std::string_view kind_name(DescriptorKind kind);
/// Accepts the CLI spellings: mfcc, melspec, chroma-stft, chroma-cqt, chroma-cens.
DescriptorKind parse_kind(std::string_view name);

struct FeatureVector {
    std::vector<double> values;
    std::string feature_name;
};

/// First `keep` orthonormal DCT-II coefficients of each log-mel frame.
Grid mfcc(const Grid& mel_db, std::size_t keep = kMfccCoefficients);

/// Raw mel power (no dB conversion).
Grid melspectrogram(const Spectrogram& s, const MelFilterbank& fb);

/// Folds STFT bins onto 12 pitch classes (A4 = 440 Hz, bin 0 skipped),
/// then normalizes each frame by its maximum.
Grid chroma_stft(const Spectrogram& s);

/// Pitch class of a frequency: (round(12 log2(f / 440)) + 69) mod 12.
int pitch_class(double hz);

/// Octave-folds an 84-bin CQT grid (bin 0 = C) and max-normalizes frames.
Grid chroma_cqt(const Grid& cqt);

/// Number of thresholds {0.05, 0.1, 0.2, 0.4} strictly below v.
int cens_quantize(double v);

/// L1 normalization, quantization, length-41 Hann smoothing along time
/// (reflect padded) and per-frame L2 normalization.
Grid chroma_cens(const Grid& chroma);

/// Mean over frames.
std::vector<double> aggregate_global(const Grid& frames);

/// Means over `segments` contiguous frame runs [floor(r n/P), floor((r+1) n/P)),
/// concatenated; empty runs contribute zeros.
std::vector<double> aggregate_segmented(const Grid& frames, std::size_t segments);

/// Per-frame descriptor grid for `kind` (before aggregation).
Grid descriptor_frames(const Signal& s, DescriptorKind kind);

FeatureVector extract_feature(std::span<const std::uint8_t> bytes, const DescriptorConfig& cfg);

}  // namespace binsonar
