#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace binsonar::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

struct IngestOptions {
    std::filesystem::path dir;
    std::filesystem::path labels;
    std::filesystem::path out;
    std::uint64_t seed = 0;
};

struct ExtractOptions {
    std::filesystem::path manifest;
    std::string feature;  // mfcc|melspec|chroma-stft|chroma-cqt|chroma-cens|bigrams|pehash|gist
    bool expanded = false;
    std::optional<std::size_t> segments;
    int bytes_per_sample = 1;
    std::filesystem::path out;
    int workers = 0;  // 0 = OpenMP default
};

struct EvalOptions {
    std::filesystem::path features;
    std::filesystem::path manifest;
    std::string classifier = "knn";
    int k = 1;
    int trees = 100;
    int folds = 10;
    std::uint64_t seed = 0;
    std::filesystem::path out;
};

struct OrthoOptions {
    std::vector<std::filesystem::path> results;
    std::filesystem::path out_dir;
};

struct FuseOptions {
    std::vector<std::filesystem::path> results;
    std::filesystem::path out;
};

/// Feature names accepted by `extract`.
bool is_static_feature(const std::string& feature);

/// Vector for one file under a static feature (bigrams, pehash, gist).
std::vector<double> extract_static(std::span<const std::uint8_t> bytes, const std::string& feature);

/// Path of the exclusion list written next to an extract output.
std::filesystem::path exclusion_path(const std::filesystem::path& out);

/// BINSONAR_SEED, when set, replaces the command-line seed.
std::uint64_t effective_seed(std::uint64_t flag_seed);

int run_ingest(const IngestOptions& o, std::ostream& log);
int run_extract(const ExtractOptions& o, std::ostream& log);
int run_eval(const EvalOptions& o, std::ostream& out, std::ostream& log);
int run_ortho(const OrthoOptions& o, std::ostream& out, std::ostream& log);
int run_fuse(const FuseOptions& o, std::ostream& out, std::ostream& log);

/// Full command-line entry point (argument parsing included).
int run_cli(int argc, const char* const* argv);

}  // namespace binsonar::cli
