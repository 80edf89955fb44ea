#include <benchmark/benchmark.h>

#include <random>

#include "binsonar/descriptors.hpp"
#include "binsonar/rng.hpp"
#include "binsonar/spectral.hpp"

using namespace binsonar;

namespace {

Signal random_signal(std::size_t n) {
    std::mt19937_64 gen(1);
    Signal s;
    s.samples.resize(n);
    for (auto& v : s.samples) v = 2 * uniform_unit(gen) - 1;
    s.source_len = n;
    s.bytes_per_sample = 1;
    return s;
}

const Signal& signal_64k() {
    static const Signal s = random_signal(65536);
    return s;
}

const MelFilterbank& bank() {
    static const auto fb = build_mel_filterbank(kSampleRate, 2048, kMelBands, 0, kSampleRate / 2);
    return fb;
}

const CqtKernelSet& kernels() {
    static const auto k = build_cqt_kernels();
    return k;
}

void BM_stft_parallel(benchmark::State& st) {
    const auto frames = frame_signal(signal_64k());
    for (auto _ : st) benchmark::DoNotOptimize(stft_power(frames));
}

void BM_stft_serial(benchmark::State& st) {
    const auto frames = frame_signal(signal_64k());
    for (auto _ : st) benchmark::DoNotOptimize(serial::stft_power(frames));
}

void BM_mel_parallel(benchmark::State& st) {
    const auto spec = stft_power(frame_signal(signal_64k()));
    for (auto _ : st) benchmark::DoNotOptimize(apply_mel(spec, bank()));
}

void BM_mel_serial(benchmark::State& st) {
    const auto spec = stft_power(frame_signal(signal_64k()));
    for (auto _ : st) benchmark::DoNotOptimize(serial::apply_mel(spec, bank()));
}

void BM_cqt_parallel(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(cqt_power(signal_64k(), kernels()));
}

void BM_cqt_serial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(serial::cqt_power(signal_64k(), kernels()));
}

void BM_extract(benchmark::State& st) {
    std::mt19937_64 gen(2);
    std::vector<std::uint8_t> bytes(std::size_t(st.range(1)));
    for (auto& b : bytes) b = std::uint8_t(gen() >> 56);
    const DescriptorConfig cfg{static_cast<DescriptorKind>(st.range(0)), true};
    st.SetLabel(std::string(kind_name(cfg.kind)));
    for (auto _ : st) benchmark::DoNotOptimize(extract_feature(bytes, cfg));
    st.SetBytesProcessed(std::int64_t(st.iterations()) * st.range(1));
}

}  // namespace

BENCHMARK(BM_stft_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_stft_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mel_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mel_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cqt_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cqt_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_extract)->ArgsProduct({{0, 1, 2, 3, 4}, {16384}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
