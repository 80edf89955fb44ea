#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "binsonar/grid.hpp"

namespace binsonar {

constexpr std::size_t kBigramDim = 65536;
constexpr std::size_t kPehashDim = 40;
constexpr std::size_t kGistDim = 320;

/// Overlapping byte-pair counts indexed by first * 256 + second.
std::vector<double> byte_bigrams(std::span<const std::uint8_t> bytes);

struct PeSection {
    std::uint32_t virtual_address = 0;
    std::uint32_t raw_size = 0;
    std::uint32_t characteristics = 0;

    bool operator==(const PeSection&) const = default;
};

/// PE header attributes hashed by pehash.
struct PeSummary {
    std::uint16_t image_characteristics = 0;  // COFF Characteristics
    std::uint16_t subsystem = 0;
    std::uint64_t stack_commit = 0;
    std::uint64_t heap_commit = 0;
    bool pe32_plus = false;
    std::vector<PeSection> sections;

    bool operator==(const PeSummary&) const = default;
};

/// Parses DOS, COFF and optional headers (PE32 and PE32+) and the section
/// table. Throws NotAPeError on bad signatures and FormatError on truncation.
PeSummary parse_pe_summary(std::span<const std::uint8_t> bytes);

/// Big-endian pre-image: characteristics, subsystem, stack commit, heap
/// commit, then (virtual address, raw size, characteristics) per section.
std::vector<std::uint8_t> pehash_preimage(const PeSummary& p);

/// 40-character lowercase hex SHA-1 of the pre-image.
std::string pehash_hex(const PeSummary& p);

/// ASCII codes of pehash_hex.
std::vector<double> pehash_vector(const PeSummary& p);

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

/// Width picked from file size (32 below 10 KiB ... 1024 from 1000 KiB).
std::size_t image_width_for(std::size_t file_size);

/// One pixel per byte, last row zero-padded.
GrayImage binary_to_image(std::span<const std::uint8_t> bytes);

/// Bilinear resize to size x size with intensities scaled to [0, 1].
Grid resize_bilinear(const GrayImage& img, std::size_t size);

/// Frequency-domain Gabor transfer functions on a size x size grid.
class GaborBank {
public:
    /// `angles[s]` lists the orientation angles (radians) used at scale s.
    GaborBank(std::vector<std::vector<double>> angles, std::size_t size);

    /// Evenly spaced orientations per scale (k * pi / n).
    static GaborBank standard(const std::vector<int>& orientations_per_scale, std::size_t size);

    std::size_t size() const { return size_; }
    std::size_t filter_count() const { return filters_.size(); }
    std::size_t scale_of(std::size_t filter) const { return scale_of_[filter]; }
    /// Unshifted transfer function, zero at DC.
    const std::vector<double>& transfer(std::size_t filter) const { return filters_[filter]; }

private:
    std::size_t size_;
    std::vector<std::vector<double>> filters_;
    std::vector<std::size_t> scale_of_;
};

constexpr std::size_t kGistImageSize = 64;
constexpr std::size_t kGistBlocks = 4;

/// Mean filter-response magnitude over a blocks x blocks grid for every
/// filter of `bank`, filter-major. `img` must be bank.size() square.
std::vector<double> gist_from_resized(const Grid& img, const GaborBank& bank, std::size_t blocks = kGistBlocks);

/// 320-D descriptor: 64x64 resize, 20 filters (3 scales with 8/6/6
/// orientations), 4x4 block means.
std::vector<double> gist_vector(const GrayImage& img);

}  // namespace binsonar
