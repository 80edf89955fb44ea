#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "binsonar/classify.hpp"
#include "binsonar/rng.hpp"

namespace fixture {

struct PeSectionSpec {
    std::uint32_t virtual_address;
    std::uint32_t raw_size;
    std::uint32_t characteristics;
};

struct PeSpec {
    std::uint16_t characteristics = 0x0102;  // EXECUTABLE_IMAGE | 32BIT_MACHINE
    std::uint16_t subsystem = 3;             // WINDOWS_CUI
    std::uint64_t stack_commit = 0x1000;
    std::uint64_t heap_commit = 0x2000;
    bool pe32_plus = false;
    std::vector<PeSectionSpec> sections = {{0x1000, 0x200, 0x60000020}, {0x2000, 0x400, 0xC0000040}};
};

inline void put(std::vector<std::uint8_t>& b, std::size_t at, std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) b[at + std::size_t(i)] = std::uint8_t(v >> (8 * i));
}

/// Headers and section table only: the file ends right after the last
/// section header, so every truncation cuts something the parser needs.
inline std::vector<std::uint8_t> minimal_pe(const PeSpec& spec = {}) {
    const std::size_t e_lfanew = 0x40;
    const std::size_t opt_size = spec.pe32_plus ? 240 : 224;
    const std::size_t opt = e_lfanew + 4 + 20;
    const std::size_t table = opt + opt_size;
    std::vector<std::uint8_t> b(table + 40 * spec.sections.size(), 0);
    b[0] = 'M';
    b[1] = 'Z';
    put(b, 0x3C, e_lfanew, 4);
    b[e_lfanew] = 'P';
    b[e_lfanew + 1] = 'E';
    const std::size_t coff = e_lfanew + 4;
    put(b, coff, spec.pe32_plus ? 0x8664 : 0x14C, 2);
    put(b, coff + 2, spec.sections.size(), 2);
    put(b, coff + 16, opt_size, 2);
    put(b, coff + 18, spec.characteristics, 2);
    put(b, opt, spec.pe32_plus ? 0x20B : 0x10B, 2);
    put(b, opt + 68, spec.subsystem, 2);
    if (spec.pe32_plus) {
        put(b, opt + 72, 0x100000, 8);
        put(b, opt + 80, spec.stack_commit, 8);
        put(b, opt + 88, 0x100000, 8);
        put(b, opt + 96, spec.heap_commit, 8);
    } else {
        put(b, opt + 72, 0x100000, 4);
        put(b, opt + 76, spec.stack_commit, 4);
        put(b, opt + 80, 0x100000, 4);
        put(b, opt + 84, spec.heap_commit, 4);
    }
    for (std::size_t i = 0; i < spec.sections.size(); ++i) {
        const std::size_t s = table + 40 * i;
        const char* name = i == 0 ? ".text" : ".data";
        for (std::size_t c = 0; name[c]; ++c) b[s + c] = std::uint8_t(name[c]);
        put(b, s + 8, spec.sections[i].raw_size, 4);
        put(b, s + 12, spec.sections[i].virtual_address, 4);
        put(b, s + 16, spec.sections[i].raw_size, 4);
        put(b, s + 20, 0x400 + 0x200 * i, 4);
        put(b, s + 36, spec.sections[i].characteristics, 4);
    }
    return b;
}

inline std::vector<std::uint8_t> random_bytes(std::size_t n, std::mt19937_64& gen) {
    std::vector<std::uint8_t> b(n);
    for (auto& v : b) v = std::uint8_t(gen() >> 56);
    return b;
}

/// File of a synthetic malware "family": a family-specific periodic motif
/// with a random phase and 10% of bytes replaced by noise.
inline std::vector<std::uint8_t> family_file(int family, std::size_t size, std::mt19937_64& gen) {
    static const std::size_t periods[] = {7, 24, 61, 5, 37};
    std::mt19937_64 motif_gen(1000 + std::uint64_t(family));
    const std::size_t period = periods[family % 5];
    const auto motif = random_bytes(period, motif_gen);
    const std::size_t phase = binsonar::uniform_below(gen, period);
    std::vector<std::uint8_t> b(size);
    for (std::size_t i = 0; i < size; ++i) {
        b[i] = motif[(i + phase) % period];
        if (binsonar::uniform_unit(gen) < 0.1) b[i] = std::uint8_t(gen() >> 56);
    }
    return b;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("binsonar-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    f << s;
}

/// 3 families x 60 files plus 60 uniform-random benign files, 5-50 KB,
/// written under `dir` together with labels.csv.
inline void write_synthetic_corpus(const std::filesystem::path& dir, std::uint64_t seed, std::size_t per_class = 60) {
    std::mt19937_64 gen(seed);
    std::string csv = "filename,label\n";
    for (int cls = 0; cls < 4; ++cls) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t size = 5 * 1024 + binsonar::uniform_below(gen, 45 * 1024 + 1);
            const auto bytes = cls < 3 ? family_file(cls, size, gen) : random_bytes(size, gen);
            const std::string label = cls < 3 ? "family" + std::to_string(cls) : "benign";
            const std::string name = label + "_" + std::to_string(i) + ".bin";
            write_bytes(dir / name, bytes);
            csv += name + "," + label + "\n";
        }
    }
    write_text(dir / "labels.csv", csv);
}

inline std::string sample_id(std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(64 - s.size(), '0') + s;
}

/// Prediction file over `n` samples (labels alternate x/y) that is wrong
/// exactly on `wrong`.
inline binsonar::EvalResult result_with_errors(const std::string& name, std::size_t n,
                                               const std::set<std::size_t>& wrong) {
    binsonar::EvalResult r;
    r.feature_name = name;
    r.classifier = "knn";
    r.folds = 10;
    r.classes = {"x", "y"};
    for (std::size_t i = 0; i < n; ++i) {
        const std::string t = i % 2 ? "y" : "x";
        const std::string p = wrong.count(i) ? (i % 2 ? "x" : "y") : t;
        r.predictions.push_back({sample_id(i), t, p, int(i % 10)});
    }
    r.accuracy = double(n - wrong.size()) / double(n);
    r.confusion = binsonar::confusion_matrix(r.predictions, r.classes);
    return r;
}

/// Four results over 1,636 samples whose error sets reproduce the reference
/// small-dataset counts (gist 8, instrcount 5, pehash 145, MFCCe 11) and
/// every entry of the reference E matrix.
inline std::vector<binsonar::EvalResult> small_dataset_results() {
    std::set<std::size_t> gist, instr, pehash, mfcc;
    for (std::size_t i = 0; i < 8; ++i) gist.insert(i);
    for (std::size_t i = 8; i < 13; ++i) instr.insert(i);
    mfcc = {0, 1, 13};
    for (std::size_t i = 14; i < 22; ++i) mfcc.insert(i);
    pehash = {2, 3, 8, 9, 10, 13};
    for (std::size_t i = 100; i < 239; ++i) pehash.insert(i);
    return {result_with_errors("gist", 1636, gist), result_with_errors("instrcount", 1636, instr),
            result_with_errors("pehash", 1636, pehash), result_with_errors("MFCCe", 1636, mfcc)};
}

}  // namespace fixture
