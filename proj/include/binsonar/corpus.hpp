#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace binsonar {

struct SampleRecord {
    std::string id;  // lowercase hex SHA-256 of content
    std::string path;
    std::string label;
    std::uint64_t size = 0;

    bool operator==(const SampleRecord&) const = default;
};

/// Labeled sample list, ordered ascending by id (path breaks ties between
/// byte-identical files).
struct Manifest {
    std::vector<SampleRecord> samples;
    std::set<std::string> classes;
    std::uint64_t seed = 0;

    bool operator==(const Manifest&) const = default;

    /// Index of the first sample with this id, or -1.
    std::ptrdiff_t find(const std::string& id) const;
};

/// Reads `filename,label` rows from `labels_csv` and hashes each file under
/// `root`. Missing files are reported together in one IoError.
Manifest ingest_directory(const std::filesystem::path& root, const std::filesystem::path& labels_csv,
                          std::uint64_t seed = 0);

void save_manifest(const Manifest& m, const std::filesystem::path& out);
Manifest load_manifest(const std::filesystem::path& in);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& p);

/// One descriptor's per-sample vectors. Values are computed in double and
/// stored as 32-bit floats on disk.
struct FeatureMatrix {
    std::string feature_name;
    std::uint32_t dim = 0;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;

    bool operator==(const FeatureMatrix&) const = default;

    /// Throws InvalidArgument if any FeatureMatrix invariant is broken.
    void validate() const;
};

constexpr std::size_t kSampleIdLength = 64;

/// Size in bytes of the FMX1 header for a given feature name.
std::size_t fmx_header_size(const std::string& feature_name);

std::vector<std::uint8_t> encode_feature_matrix(const FeatureMatrix& m);
FeatureMatrix decode_feature_matrix(const std::vector<std::uint8_t>& bytes);

void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& out);
FeatureMatrix read_feature_matrix(const std::filesystem::path& in);

}  // namespace binsonar
