#include "binsonar/staticfeat.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "binsonar/digest.hpp"
#include "binsonar/error.hpp"
#include "binsonar/fft.hpp"

namespace binsonar {

std::vector<double> byte_bigrams(std::span<const std::uint8_t> bytes) {
    std::vector<double> counts(kBigramDim, 0.0);
    for (std::size_t i = 0; i + 1 < bytes.size(); ++i) counts[bytes[i] * 256u + bytes[i + 1]] += 1.0;
    return counts;
}

namespace {

// Little-endian reads that refuse to go past the end of the buffer.
class PeReader {
public:
    explicit PeReader(std::span<const std::uint8_t> b) : bytes_(b) {}

    void require(std::uint64_t offset, std::uint64_t len, const char* what) const {
        if (offset > bytes_.size() || len > bytes_.size() - offset)
            throw FormatError(std::string("PE truncated in ") + what, static_cast<std::size_t>(std::min<std::uint64_t>(offset, bytes_.size())));
    }
    std::uint64_t read(std::uint64_t offset, int width, const char* what) const {
        require(offset, static_cast<std::uint64_t>(width), what);
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[offset + i]) << (8 * i);
        return v;
    }
    std::uint16_t u16(std::uint64_t offset, const char* what) const { return static_cast<std::uint16_t>(read(offset, 2, what)); }
    std::uint32_t u32(std::uint64_t offset, const char* what) const { return static_cast<std::uint32_t>(read(offset, 4, what)); }
    std::uint64_t u64(std::uint64_t offset, const char* what) const { return read(offset, 8, what); }

private:
    std::span<const std::uint8_t> bytes_;
};

constexpr std::uint64_t kDosHeaderSize = 64;
constexpr std::uint64_t kCoffHeaderSize = 20;
constexpr std::uint64_t kSectionHeaderSize = 40;
constexpr std::uint16_t kPe32Magic = 0x10B;
constexpr std::uint16_t kPe32PlusMagic = 0x20B;

}  // namespace

PeSummary parse_pe_summary(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 2 && !(bytes[0] == 'M' && bytes[1] == 'Z')) throw NotAPeError("missing MZ signature", 0);
    const PeReader r(bytes);
    r.require(0, kDosHeaderSize, "DOS header");

    const std::uint64_t pe = r.u32(0x3C, "DOS header");
    r.require(pe, 4, "PE signature");
    if (!(bytes[pe] == 'P' && bytes[pe + 1] == 'E' && bytes[pe + 2] == 0 && bytes[pe + 3] == 0))
        throw NotAPeError("missing PE\\0\\0 signature", static_cast<std::size_t>(pe));

    const std::uint64_t coff = pe + 4;
    r.require(coff, kCoffHeaderSize, "COFF header");
    PeSummary s;
    const std::uint16_t n_sections = r.u16(coff + 2, "COFF header");
    const std::uint16_t opt_size = r.u16(coff + 16, "COFF header");
    s.image_characteristics = r.u16(coff + 18, "COFF header");

    const std::uint64_t opt = coff + kCoffHeaderSize;
    const std::uint16_t magic = r.u16(opt, "optional header");
    if (magic != kPe32Magic && magic != kPe32PlusMagic)
        throw FormatError("unknown optional header magic " + std::to_string(magic), static_cast<std::size_t>(opt));
    s.pe32_plus = magic == kPe32PlusMagic;
    const std::uint64_t needed = s.pe32_plus ? 104 : 88;
    if (opt_size < needed)
        throw FormatError("optional header too small (" + std::to_string(opt_size) + " bytes)", static_cast<std::size_t>(coff + 16));
    r.require(opt, needed, "optional header");
    s.subsystem = r.u16(opt + 68, "optional header");
    if (s.pe32_plus) {
        s.stack_commit = r.u64(opt + 80, "optional header");
        s.heap_commit = r.u64(opt + 96, "optional header");
    } else {
        s.stack_commit = r.u32(opt + 76, "optional header");
        s.heap_commit = r.u32(opt + 84, "optional header");
    }

    const std::uint64_t table = opt + opt_size;
    const std::uint64_t table_len = kSectionHeaderSize * n_sections;
    if (table > bytes.size() || table_len > bytes.size() - table)
        throw FormatError("section table (" + std::to_string(n_sections) + " entries) exceeds file size",
                          static_cast<std::size_t>(std::min<std::uint64_t>(table, bytes.size())));
    s.sections.reserve(n_sections);
    for (std::uint64_t i = 0; i < n_sections; ++i) {
        const std::uint64_t sec = table + i * kSectionHeaderSize;
        s.sections.push_back({r.u32(sec + 12, "section table"), r.u32(sec + 16, "section table"),
                              r.u32(sec + 36, "section table")});
    }
    return s;
}

namespace {

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::vector<std::uint8_t> pehash_preimage(const PeSummary& p) {
    std::vector<std::uint8_t> out;
    put_be(out, p.image_characteristics, 2);
    put_be(out, p.subsystem, 2);
    put_be(out, p.stack_commit, 8);
    put_be(out, p.heap_commit, 8);
    for (const auto& s : p.sections) {
        put_be(out, s.virtual_address, 4);
        put_be(out, s.raw_size, 4);
        put_be(out, s.characteristics, 4);
    }
    return out;
}

std::string pehash_hex(const PeSummary& p) { return sha1_hex(pehash_preimage(p)); }

std::vector<double> pehash_vector(const PeSummary& p) {
    const auto hex = pehash_hex(p);
    std::vector<double> v(hex.size());
    std::transform(hex.begin(), hex.end(), v.begin(), [](char c) { return static_cast<double>(static_cast<unsigned char>(c)); });
    return v;
}

std::size_t image_width_for(std::size_t file_size) {
    constexpr std::size_t kib = 1024;
    if (file_size < 10 * kib) return 32;
    if (file_size < 30 * kib) return 64;
    if (file_size < 60 * kib) return 128;
    if (file_size < 100 * kib) return 256;
    if (file_size < 200 * kib) return 384;
    if (file_size < 500 * kib) return 512;
    if (file_size < 1000 * kib) return 768;
    return 1024;
}

GrayImage binary_to_image(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw InvalidArgument("cannot build an image from empty input");
    GrayImage img;
    img.width = image_width_for(bytes.size());
    img.height = (bytes.size() + img.width - 1) / img.width;
    img.pixels.assign(img.width * img.height, 0);
    std::copy(bytes.begin(), bytes.end(), img.pixels.begin());
    return img;
}

Grid resize_bilinear(const GrayImage& img, std::size_t size) {
    Grid out(size, size);
    const double sx = static_cast<double>(img.width) / static_cast<double>(size);
    const double sy = static_cast<double>(img.height) / static_cast<double>(size);
    auto coord = [](double pos, std::size_t limit, std::size_t& lo, std::size_t& hi, double& frac) {
        pos = std::clamp(pos, 0.0, static_cast<double>(limit - 1));
        lo = static_cast<std::size_t>(std::floor(pos));
        hi = std::min(lo + 1, limit - 1);
        frac = pos - static_cast<double>(lo);
    };
    for (std::size_t y = 0; y < size; ++y) {
        std::size_t y0, y1;
        double fy;
        coord((static_cast<double>(y) + 0.5) * sy - 0.5, img.height, y0, y1, fy);
        for (std::size_t x = 0; x < size; ++x) {
            std::size_t x0, x1;
            double fx;
            coord((static_cast<double>(x) + 0.5) * sx - 0.5, img.width, x0, x1, fx);
            const double top = (1 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
            const double bottom = (1 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
            out(y, x) = ((1 - fy) * top + fy * bottom) / 255.0;
        }
    }
    return out;
}

GaborBank::GaborBank(std::vector<std::vector<double>> angles, std::size_t size) : size_(size) {
    if (!is_power_of_two(size)) throw InvalidArgument("Gabor bank size must be a power of two");
    const double n = static_cast<double>(size);
    for (std::size_t scale = 0; scale < angles.size(); ++scale) {
        const double centre = 0.3 / std::pow(1.85, static_cast<double>(scale));
        const double no = static_cast<double>(angles[scale].size());
        const double angular = 16.0 * no * no / (32.0 * 32.0);
        for (double angle : angles[scale]) {
            std::vector<double> g(size * size, 0.0);
            for (std::size_t v = 0; v < size; ++v) {
                const double fy = v < size / 2 ? static_cast<double>(v) : static_cast<double>(v) - n;
                for (std::size_t u = 0; u < size; ++u) {
                    if (u == 0 && v == 0) continue;
                    const double fx = u < size / 2 ? static_cast<double>(u) : static_cast<double>(u) - n;
                    const double radius = std::sqrt(fx * fx + fy * fy) / n;
                    double theta = std::atan2(fy, fx) + angle;
                    if (theta < -std::numbers::pi) theta += 2 * std::numbers::pi;
                    if (theta > std::numbers::pi) theta -= 2 * std::numbers::pi;
                    const double radial = radius / centre - 1.0;
                    g[v * size + u] =
                        std::exp(-10.0 * 0.35 * radial * radial - 2.0 * angular * std::numbers::pi * theta * theta);
                }
            }
            filters_.push_back(std::move(g));
            scale_of_.push_back(scale);
        }
    }
}

GaborBank GaborBank::standard(const std::vector<int>& orientations_per_scale, std::size_t size) {
    std::vector<std::vector<double>> angles;
    for (int no : orientations_per_scale) {
        std::vector<double> a;
        for (int j = 0; j < no; ++j) a.push_back(std::numbers::pi * j / no);
        angles.push_back(std::move(a));
    }
    return GaborBank(std::move(angles), size);
}

std::vector<double> gist_from_resized(const Grid& img, const GaborBank& bank, std::size_t blocks) {
    const std::size_t n = bank.size();
    if (img.rows != n || img.cols != n) throw InvalidArgument("GIST input size does not match Gabor bank");
    if (blocks == 0 || n % blocks != 0) throw InvalidArgument("GIST block grid must divide the image size");

    std::vector<std::complex<double>> spectrum(n * n);
    for (std::size_t i = 0; i < n * n; ++i) spectrum[i] = img.data[i];
    fft2d(spectrum, n, n, false);

    const std::size_t cell = n / blocks;
    std::vector<double> out;
    out.reserve(bank.filter_count() * blocks * blocks);
    std::vector<std::complex<double>> response(n * n);
    for (std::size_t f = 0; f < bank.filter_count(); ++f) {
        const auto& g = bank.transfer(f);
        for (std::size_t i = 0; i < n * n; ++i) response[i] = spectrum[i] * g[i];
        fft2d(response, n, n, true);
        for (std::size_t by = 0; by < blocks; ++by) {
            for (std::size_t bx = 0; bx < blocks; ++bx) {
                double acc = 0.0;
                for (std::size_t y = by * cell; y < (by + 1) * cell; ++y)
                    for (std::size_t x = bx * cell; x < (bx + 1) * cell; ++x) acc += std::abs(response[y * n + x]);
                out.push_back(acc / static_cast<double>(cell * cell));
            }
        }
    }
    return out;
}

std::vector<double> gist_vector(const GrayImage& img) {
    if (img.width < 8 || img.height < 8)
        throw InvalidArgument("GIST needs an image of at least 8x8 pixels, got " + std::to_string(img.width) + "x" +
                              std::to_string(img.height));
    static const GaborBank bank = GaborBank::standard({8, 6, 6}, kGistImageSize);
    return gist_from_resized(resize_bilinear(img, kGistImageSize), bank);
}

}  // namespace binsonar
