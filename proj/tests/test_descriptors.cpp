#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "binsonar/descriptors.hpp"
#include "binsonar/error.hpp"
#include "binsonar/rng.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace binsonar;

namespace {

constexpr DescriptorKind kAllKinds[] = {DescriptorKind::Mfcc, DescriptorKind::MelSpec, DescriptorKind::ChromaStft,
                                        DescriptorKind::ChromaCqt, DescriptorKind::ChromaCens};

std::size_t argmax(std::span<const double> row) {
    return std::size_t(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

TEST_SUITE("descriptors") {

TEST_CASE("configured dimensions") {
    CHECK(DescriptorConfig{DescriptorKind::Mfcc, false}.dim() == 20);
    CHECK(DescriptorConfig{DescriptorKind::MelSpec, false}.dim() == 128);
    CHECK(DescriptorConfig{DescriptorKind::ChromaCens, false}.dim() == 12);
    CHECK(DescriptorConfig{DescriptorKind::Mfcc, true}.dim() == 320);
    CHECK(DescriptorConfig{DescriptorKind::MelSpec, true}.dim() == 384);
    CHECK(DescriptorConfig{DescriptorKind::ChromaStft, true}.dim() == 312);
    CHECK(DescriptorConfig{DescriptorKind::Mfcc, true, 4}.dim() == 80);
    CHECK(DescriptorConfig{DescriptorKind::Mfcc, true, 0, 2}.feature_name() == "mfcc-e16-bps2");
    CHECK(parse_kind("chroma-cens") == DescriptorKind::ChromaCens);
    CHECK_THROWS_AS(parse_kind("gist"), InvalidArgument);
    CHECK_THROWS_AS((DescriptorConfig{DescriptorKind::Mfcc, false, 4}.validate()), InvalidArgument);
}

TEST_CASE("MFCC of a 10,000-byte file matches the straight-line oracle") {
    std::mt19937_64 gen(2024);
    auto bytes = fixture::family_file(1, 10000, gen);
    const auto got = extract_feature(bytes, {DescriptorKind::Mfcc, false});
    const auto ref = oracle::mfcc_global(bytes);
    REQUIRE(got.values.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(got.values[i] - ref[i]) <= 1e-6 * std::max(1.0, std::abs(ref[i])));
}

TEST_CASE("all-zero file gives identical frames") {
    const std::vector<std::uint8_t> zeros(20000, 0x80);
    const auto frames = descriptor_frames(bytes_to_signal(zeros, 1), DescriptorKind::Mfcc);
    REQUIRE(frames.cols == 20);
    for (std::size_t f = 1; f < frames.rows; ++f)
        for (std::size_t c = 0; c < 20; ++c) CHECK(frames(f, c) == frames(0, c));

    const auto mel = descriptor_frames(bytes_to_signal(zeros, 1), DescriptorKind::MelSpec);
    CHECK(mel.cols == 128);
    for (double v : mel.data) CHECK(v == 0.0);
}

TEST_CASE("mel spectrogram values are non-negative") {
    std::mt19937_64 gen(3);
    const auto bytes = fixture::random_bytes(8000, gen);
    const auto mel = descriptor_frames(bytes_to_signal(bytes, 1), DescriptorKind::MelSpec);
    for (double v : mel.data) CHECK(v >= 0.0);
}

TEST_CASE("pitch-class mapping") {
    CHECK(pitch_class(440.0) == 9);
    CHECK(pitch_class(261.6256) == 0);
    CHECK(pitch_class(kCqtFmin) == 0);
    CHECK(pitch_class(466.16) == 10);
    CHECK(pitch_class(10.7666) == pitch_class(10.7666 * 2));
}

TEST_CASE("chroma_stft: zero frame and a 440 Hz tone") {
    Spectrogram zero{Grid(2, 1025), std::vector<double>(1025)};
    for (std::size_t k = 0; k < 1025; ++k) zero.bin_hz[k] = double(k) * kSampleRate / 2048;
    for (double v : chroma_stft(zero).data) CHECK(v == 0.0);

    Signal s;
    s.samples.resize(16384);
    for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] = 0.5 * std::sin(2 * std::numbers::pi * 440.0 * double(i) / kSampleRate);
    const auto chroma = chroma_stft(stft_power(s, FrameParams{}));
    CHECK(chroma.cols == 12);
    for (std::size_t f = 0; f < chroma.rows; ++f) {
        CHECK(argmax(chroma.row(f)) == 9);
        CHECK(chroma(f, 9) == 1.0);
    }
}

TEST_CASE("chroma_cqt folding") {
    Grid g(2, 84);
    g(1, 13) = 5.0;
    const auto c = chroma_cqt(g);
    CHECK(c.cols == 12);
    for (std::size_t k = 0; k < 12; ++k) CHECK(c(0, k) == 0.0);
    CHECK(argmax(c.row(1)) == 1);
    CHECK(c(1, 1) == 1.0);

    Grid octaves(1, 84);
    for (std::size_t o = 0; o < 7; ++o) octaves(0, 4 + 12 * o) = 1.0;
    octaves(0, 5) = 3.0;
    const auto folded = chroma_cqt(octaves);
    CHECK(folded(0, 4) == 1.0);
    CHECK(folded(0, 5) == doctest::Approx(3.0 / 7.0));
}

TEST_CASE("CENS quantization thresholds are strict") {
    CHECK(cens_quantize(0.3) == 3);
    CHECK(cens_quantize(0.05) == 0);
    CHECK(cens_quantize(0.0500001) == 1);
    CHECK(cens_quantize(0.4) == 3);
    CHECK(cens_quantize(0.9) == 4);
    CHECK(cens_quantize(1.0 / 12) == 1);
}

TEST_CASE("CENS of a constant chroma row") {
    Grid g(7, 12, 1.0 / 12);
    const auto cens = chroma_cens(g);
    for (double v : cens.data) CHECK(v == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-12));

    Grid z(3, 12);
    for (double v : chroma_cens(z).data) CHECK(v == 0.0);
}

TEST_CASE("chroma ranges and CENS norms on random files (property)") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 4; ++trial) {
        const auto bytes = fixture::random_bytes(3000 + uniform_below(gen, 12000), gen);
        const auto sig = bytes_to_signal(bytes, 1);
        for (auto kind : {DescriptorKind::ChromaStft, DescriptorKind::ChromaCqt}) {
            for (double v : descriptor_frames(sig, kind).data) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
        const auto cens = descriptor_frames(sig, DescriptorKind::ChromaCens);
        for (std::size_t f = 0; f < cens.rows; ++f) {
            double l2 = 0;
            for (double v : cens.row(f)) l2 += v * v;
            CHECK((std::abs(std::sqrt(l2) - 1.0) < 1e-9 || l2 == 0.0));
        }
    }
}

TEST_CASE("global aggregation") {
    Grid one(1, 3);
    one.data = {1, 2, 3};
    CHECK(aggregate_global(one) == std::vector<double>{1, 2, 3});

    Grid two(2, 2);
    two.data = {1, 2, 3, 6};
    CHECK(aggregate_global(two) == std::vector<double>{2, 4});

    std::mt19937_64 gen(4);
    Grid rnd(33, 7);
    for (auto& v : rnd.data) v = uniform_unit(gen) * 10 - 5;
    const auto mean = aggregate_global(rnd);
    for (std::size_t c = 0; c < 7; ++c) {
        double acc = 0;
        for (std::size_t f = 0; f < 33; ++f) acc += rnd(f, c);
        CHECK(std::abs(mean[c] - acc / 33) <= 1e-12);
    }
    CHECK_THROWS_AS(aggregate_global(Grid(0, 3)), InvalidArgument);
}

TEST_CASE("segmented aggregation") {
    std::mt19937_64 gen(5);
    Grid rnd(40, 20);
    for (auto& v : rnd.data) v = uniform_unit(gen);
    CHECK(aggregate_segmented(rnd, 16).size() == 320);
    CHECK(aggregate_segmented(rnd, 1) == aggregate_global(rnd));

    Grid g(5, 1);
    g.data = {1, 2, 3, 4, 5};
    // runs [0,1) [1,3) [3,5)
    CHECK(aggregate_segmented(g, 3) == std::vector<double>{1, 2.5, 4.5});
    // more segments than frames: empty runs are zero
    Grid h(2, 1);
    h.data = {4, 8};
    CHECK(aggregate_segmented(h, 4) == std::vector<double>{0, 4, 0, 8});
}

TEST_CASE("extract_feature dimensions for every kind and sample width (property)") {
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 3; ++trial) {
        const auto bytes = fixture::random_bytes(1 + uniform_below(gen, 9000), gen);
        for (auto kind : kAllKinds) {
            for (int bps : {1, 2, 4}) {
                for (bool expanded : {false, true}) {
                    const DescriptorConfig cfg{kind, expanded, 0, bps};
                    const auto fv = extract_feature(bytes, cfg);
                    CHECK(fv.values.size() == cfg.dim());
                    CHECK(fv.feature_name == cfg.feature_name());
                    for (double v : fv.values) CHECK(std::isfinite(v));
                }
            }
        }
    }
}

TEST_CASE("extraction is deterministic") {
    std::mt19937_64 gen(7);
    const auto bytes = fixture::random_bytes(12000, gen);
    for (auto kind : kAllKinds) {
        const DescriptorConfig cfg{kind, true};
        CHECK(extract_feature(bytes, cfg).values == extract_feature(bytes, cfg).values);
    }
}

TEST_CASE("doubling a file moves global MFCC by at most the boundary frames") {
    std::mt19937_64 gen(8);
    // 20480 bytes: a whole number of hops, so both copies frame identically away from the seam
    const auto a = fixture::family_file(0, 20480, gen);
    std::vector<std::uint8_t> aa(a);
    aa.insert(aa.end(), a.begin(), a.end());
    const auto single = extract_feature(a, {DescriptorKind::Mfcc, false}).values;
    const auto doubled = extract_feature(aa, {DescriptorKind::Mfcc, false}).values;
    const auto frames = descriptor_frames(bytes_to_signal(aa, 1), DescriptorKind::Mfcc);
    for (std::size_t c = 0; c < 20; ++c) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t f = 0; f < frames.rows; ++f) {
            lo = std::min(lo, frames(f, c));
            hi = std::max(hi, frames(f, c));
        }
        CHECK(std::abs(single[c] - doubled[c]) <= 8.0 / double(frames.rows) * (hi - lo) + 1e-9);
    }
}

TEST_CASE("extract_feature rejects empty input") {
    CHECK_THROWS_AS(extract_feature(std::vector<std::uint8_t>{}, {}), InvalidArgument);
}

}
