#include "binsonar/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "binsonar/error.hpp"

namespace binsonar {

std::size_t base_dim(DescriptorKind kind) {
    switch (kind) {
        case DescriptorKind::Mfcc: return kMfccCoefficients;
        case DescriptorKind::MelSpec: return kMelBands;
        case DescriptorKind::ChromaStft:
        case DescriptorKind::ChromaCqt:
        case DescriptorKind::ChromaCens: return kChromaBins;
    }
    return 0;
}

std::size_t default_segments(DescriptorKind kind) {
    switch (kind) {
        case DescriptorKind::Mfcc: return 16;
        case DescriptorKind::MelSpec: return 3;
        default: return 26;
    }
}

std::string_view kind_name(DescriptorKind kind) {
    switch (kind) {
        case DescriptorKind::Mfcc: return "mfcc";
        case DescriptorKind::MelSpec: return "melspec";
        case DescriptorKind::ChromaStft: return "chroma-stft";
        case DescriptorKind::ChromaCqt: return "chroma-cqt";
        case DescriptorKind::ChromaCens: return "chroma-cens";
    }
    return "?";
}

DescriptorKind parse_kind(std::string_view name) {
    for (auto k : {DescriptorKind::Mfcc, DescriptorKind::MelSpec, DescriptorKind::ChromaStft, DescriptorKind::ChromaCqt,
                   DescriptorKind::ChromaCens}) {
        if (kind_name(k) == name) return k;
    }
    throw InvalidArgument("unknown audio descriptor '" + std::string(name) + "'");
}

std::size_t DescriptorConfig::base_dim() const { return binsonar::base_dim(kind); }

std::size_t DescriptorConfig::segment_count() const {
    if (!expanded) return 1;
    return segments == 0 ? default_segments(kind) : segments;
}

std::size_t DescriptorConfig::dim() const { return base_dim() * segment_count(); }

std::string DescriptorConfig::feature_name() const {
    std::string name(kind_name(kind));
    if (expanded) name += "-e" + std::to_string(segment_count());
    if (bytes_per_sample != 1) name += "-bps" + std::to_string(bytes_per_sample);
    return name;
}

void DescriptorConfig::validate() const {
    if (bytes_per_sample != 1 && bytes_per_sample != 2 && bytes_per_sample != 4)
        throw InvalidArgument("bytes_per_sample must be 1, 2 or 4");
    if (!expanded && segments != 0) throw InvalidArgument("segments requires an expanded descriptor");
}

Grid mfcc(const Grid& mel_db, std::size_t keep) {
    const DctII dct(mel_db.cols, keep);
    Grid out(mel_db.rows, keep);
    for (std::size_t f = 0; f < mel_db.rows; ++f) dct.apply(mel_db.row(f), out.row(f));
    return out;
}

Grid melspectrogram(const Spectrogram& s, const MelFilterbank& fb) { return apply_mel(s, fb); }

int pitch_class(double hz) {
    const auto midi = static_cast<long>(std::lround(12.0 * std::log2(hz / 440.0))) + 69;
    return static_cast<int>(((midi % 12) + 12) % 12);
}

namespace {

void max_normalize_rows(Grid& g) {
    for (std::size_t f = 0; f < g.rows; ++f) {
        auto row = g.row(f);
        const double peak = *std::max_element(row.begin(), row.end());
        if (peak > 0.0)
            for (auto& v : row) v /= peak;
    }
}

// hann(43, symmetric) with the two zero end points removed, unit sum.
std::vector<double> cens_smoothing_window() {
    constexpr std::size_t len = 41;
    std::vector<double> w(len);
    for (std::size_t i = 0; i < len; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(len + 1));
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= sum;
    return w;
}

}  // namespace

Grid chroma_stft(const Spectrogram& s) {
    Grid out(s.power.rows, kChromaBins);
    std::vector<int> cls(s.bin_hz.size(), -1);
    for (std::size_t k = 1; k < s.bin_hz.size(); ++k) cls[k] = pitch_class(s.bin_hz[k]);
    for (std::size_t f = 0; f < s.power.rows; ++f) {
        const auto row = s.power.row(f);
        auto dst = out.row(f);
        for (std::size_t k = 1; k < row.size(); ++k) dst[static_cast<std::size_t>(cls[k])] += row[k];
    }
    max_normalize_rows(out);
    return out;
}

Grid chroma_cqt(const Grid& cqt) {
    Grid out(cqt.rows, kChromaBins);
    for (std::size_t f = 0; f < cqt.rows; ++f) {
        const auto row = cqt.row(f);
        for (std::size_t b = 0; b < row.size(); ++b) out(f, b % kChromaBins) += row[b];
    }
    max_normalize_rows(out);
    return out;
}

int cens_quantize(double v) {
    int level = 0;
    for (double t : {0.05, 0.1, 0.2, 0.4})
        if (v > t) ++level;
    return level;
}

Grid chroma_cens(const Grid& chroma) {
    const std::size_t n = chroma.rows;
    const std::size_t bins = chroma.cols;
    Grid quant(n, bins);
    for (std::size_t f = 0; f < n; ++f) {
        const auto row = chroma.row(f);
        double l1 = 0.0;
        for (double v : row) l1 += std::abs(v);
        for (std::size_t c = 0; c < bins; ++c) quant(f, c) = l1 > 0.0 ? cens_quantize(row[c] / l1) : 0.0;
    }

    const auto w = cens_smoothing_window();
    const auto half = static_cast<std::ptrdiff_t>(w.size() / 2);
    Grid out(n, bins);
    for (std::size_t f = 0; f < n; ++f) {
        for (std::size_t c = 0; c < bins; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t j = -half; j <= half; ++j)
                acc += w[static_cast<std::size_t>(j + half)] * quant(reflect_index(static_cast<std::ptrdiff_t>(f) + j, n), c);
            out(f, c) = acc;
        }
    }
    for (std::size_t f = 0; f < n; ++f) {
        auto row = out.row(f);
        double l2 = 0.0;
        for (double v : row) l2 += v * v;
        l2 = std::sqrt(l2);
        if (l2 > 0.0)
            for (auto& v : row) v /= l2;
    }
    return out;
}

std::vector<double> aggregate_global(const Grid& frames) {
    if (frames.rows == 0) throw InvalidArgument("cannot aggregate zero frames");
    std::vector<double> mean(frames.cols, 0.0);
    for (std::size_t f = 0; f < frames.rows; ++f) {
        const auto row = frames.row(f);
        for (std::size_t c = 0; c < frames.cols; ++c) mean[c] += row[c];
    }
    for (auto& v : mean) v /= static_cast<double>(frames.rows);
    return mean;
}

std::vector<double> aggregate_segmented(const Grid& frames, std::size_t segments) {
    if (frames.rows == 0) throw InvalidArgument("cannot aggregate zero frames");
    if (segments == 0) throw InvalidArgument("segment count must be positive");
    const std::size_t n = frames.rows;
    std::vector<double> out(frames.cols * segments, 0.0);
    for (std::size_t r = 0; r < segments; ++r) {
        const std::size_t lo = r * n / segments;
        const std::size_t hi = (r + 1) * n / segments;
        if (hi == lo) continue;
        auto dst = std::span(out).subspan(r * frames.cols, frames.cols);
        for (std::size_t f = lo; f < hi; ++f) {
            const auto row = frames.row(f);
            for (std::size_t c = 0; c < frames.cols; ++c) dst[c] += row[c];
        }
        for (auto& v : dst) v /= static_cast<double>(hi - lo);
    }
    return out;
}

namespace {

const MelFilterbank& default_mel_filterbank() {
    static const MelFilterbank fb =
        build_mel_filterbank(kSampleRate, kDefaultFrameLength, kMelBands, 0.0, kSampleRate / 2);
    return fb;
}

const CqtKernelSet& default_cqt_kernels() {
    static const CqtKernelSet k = build_cqt_kernels();
    return k;
}

Grid cqt_for(const Signal& s) {
    const auto& full = default_cqt_kernels();
    const auto longest = *std::max_element(full.lengths.begin(), full.lengths.end());
    if (s.samples.size() >= longest) return cqt_power(s, full, kDefaultHop);
    return cqt_power(s, clip_cqt_kernels(full, s.samples.size()), kDefaultHop);
}

}  // namespace

Grid descriptor_frames(const Signal& s, DescriptorKind kind) {
    const FrameParams params;
    switch (kind) {
        case DescriptorKind::Mfcc:
            return mfcc(power_to_db(apply_mel(stft_power(s, params), default_mel_filterbank())));
        case DescriptorKind::MelSpec: return melspectrogram(stft_power(s, params), default_mel_filterbank());
        case DescriptorKind::ChromaStft: return chroma_stft(stft_power(s, params));
        case DescriptorKind::ChromaCqt: return chroma_cqt(cqt_for(s));
        case DescriptorKind::ChromaCens: return chroma_cens(chroma_cqt(cqt_for(s)));
    }
    throw InvalidArgument("unknown descriptor kind");
}

FeatureVector extract_feature(std::span<const std::uint8_t> bytes, const DescriptorConfig& cfg) {
    cfg.validate();
    const auto signal = bytes_to_signal(bytes, cfg.bytes_per_sample);
    const auto frames = descriptor_frames(signal, cfg.kind);
    FeatureVector fv;
    fv.feature_name = cfg.feature_name();
    fv.values = cfg.expanded ? aggregate_segmented(frames, cfg.segment_count()) : aggregate_global(frames);
    return fv;
}

}  // namespace binsonar
