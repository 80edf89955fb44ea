#include "binsonar/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "binsonar/digest.hpp"
#include "binsonar/error.hpp"

namespace binsonar {

namespace fs = std::filesystem;

std::ptrdiff_t Manifest::find(const std::string& id) const {
    auto it = std::lower_bound(samples.begin(), samples.end(), id,
                               [](const SampleRecord& s, const std::string& key) { return s.id < key; });
    if (it == samples.end() || it->id != id) return -1;
    return it - samples.begin();
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + p.string());
    return bytes;
}

namespace {

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

Manifest ingest_directory(const fs::path& root, const fs::path& labels_csv, std::uint64_t seed) {
    std::ifstream in(labels_csv, std::ios::binary);
    if (!in) throw IoError("cannot open labels file " + labels_csv.string());

    std::string line;
    if (!std::getline(in, line)) throw FormatError(labels_csv.string() + ": empty labels file");
    line = strip_cr(line);
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line != "filename,label")
        throw FormatError(labels_csv.string() + ":1: expected header 'filename,label'");

    Manifest m;
    m.seed = seed;
    std::vector<std::string> missing;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw FormatError(labels_csv.string() + ":" + std::to_string(line_no) +
                              ": expected exactly two fields 'filename,label'");
        std::string filename = line.substr(0, comma);
        std::string label = line.substr(comma + 1);
        if (filename.empty())
            throw FormatError(labels_csv.string() + ":" + std::to_string(line_no) + ": empty filename");
        if (label.empty())
            throw FormatError(labels_csv.string() + ":" + std::to_string(line_no) + ": empty label for " +
                              filename);

        const fs::path p = root / filename;
        std::error_code ec;
        if (!fs::is_regular_file(p, ec)) {
            missing.push_back(filename);
            continue;
        }
        const auto bytes = read_file_bytes(p);
        m.samples.push_back({sha256_hex(bytes), p.string(), label, bytes.size()});
        m.classes.insert(label);
    }
    if (!missing.empty()) {
        std::string msg = "labeled files not found under " + root.string() + ":";
        for (const auto& f : missing) msg += " " + f;
        throw IoError(msg);
    }
    std::sort(m.samples.begin(), m.samples.end(), [](const SampleRecord& a, const SampleRecord& b) {
        return a.id != b.id ? a.id < b.id : a.path < b.path;
    });
    return m;
}

void save_manifest(const Manifest& m, const fs::path& out) {
    nlohmann::ordered_json j;
    j["samples"] = nlohmann::ordered_json::array();
    for (const auto& s : m.samples) {
        j["samples"].push_back({{"id", s.id}, {"path", s.path}, {"label", s.label}, {"size", s.size}});
    }
    j["classes"] = m.classes;
    j["seed"] = m.seed;
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write " + out.string());
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + out.string());
}

Manifest load_manifest(const fs::path& in) {
    std::ifstream f(in, std::ios::binary);
    if (!f) throw IoError("cannot open manifest " + in.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
        Manifest m;
        for (const auto& s : j.at("samples")) {
            m.samples.push_back({s.at("id").get<std::string>(), s.at("path").get<std::string>(),
                                 s.at("label").get<std::string>(), s.at("size").get<std::uint64_t>()});
        }
        for (const auto& c : j.at("classes")) m.classes.insert(c.get<std::string>());
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& s : m.samples) {
            if (!m.classes.count(s.label))
                throw FormatError("manifest sample " + s.id + " has label '" + s.label + "' not in classes");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed manifest " + in.string() + ": " + e.what());
    }
}

void FeatureMatrix::validate() const {
    if (dim == 0) throw InvalidArgument("feature matrix '" + feature_name + "': dim must be positive");
    if (ids.size() != rows.size())
        throw InvalidArgument("feature matrix '" + feature_name + "': ids/rows length mismatch");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (ids[i].size() != kSampleIdLength)
            throw InvalidArgument("feature matrix: sample id must be 64 characters: " + ids[i]);
        if (rows[i].size() != dim)
            throw InvalidArgument("feature matrix: row " + std::to_string(i) + " has length " +
                                  std::to_string(rows[i].size()) + ", expected " + std::to_string(dim));
        for (double v : rows[i]) {
            if (!std::isfinite(v) || !std::isfinite(static_cast<float>(v)))
                throw InvalidArgument("feature matrix: non-finite value in row " + std::to_string(i));
        }
    }
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n)
            throw FormatError(std::string("FMX1 truncated while reading ") + what, pos_);
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string str(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::size_t fmx_header_size(const std::string& feature_name) { return 4 + 4 + 4 + feature_name.size() + 4 + 4; }

std::vector<std::uint8_t> encode_feature_matrix(const FeatureMatrix& m) {
    m.validate();
    std::vector<std::uint8_t> out{'F', 'M', 'X', '1'};
    out.reserve(fmx_header_size(m.feature_name) + m.rows.size() * (kSampleIdLength + 4 * m.dim));
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(m.feature_name.size()));
    out.insert(out.end(), m.feature_name.begin(), m.feature_name.end());
    put_u32(out, static_cast<std::uint32_t>(m.rows.size()));
    put_u32(out, m.dim);
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        out.insert(out.end(), m.ids[i].begin(), m.ids[i].end());
        for (double v : m.rows[i]) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    return out;
}

FeatureMatrix decode_feature_matrix(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    if (r.str(std::min<std::size_t>(4, bytes.size()), "magic") != "FMX1") throw FormatError("bad magic: not an FMX1 file", 0);
    const auto version = r.u32("version");
    if (version != 1) throw FormatError("unsupported FMX1 version " + std::to_string(version), 4);
    const auto name_len = r.u32("name length");
    FeatureMatrix m;
    m.feature_name = r.str(name_len, "feature name");
    const auto n = r.u32("sample count");
    m.dim = r.u32("dim");
    if (m.dim == 0) throw FormatError("dim must be positive", r.pos() - 4);
    const std::size_t record = kSampleIdLength + 4ull * m.dim;
    if (r.remaining() / record < n)
        throw FormatError("FMX1 truncated: payload holds " + std::to_string(r.remaining() / record) + " of " +
                              std::to_string(n) + " records",
                          r.pos() + (r.remaining() / record) * record);
    m.ids.reserve(n);
    m.rows.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        m.ids.push_back(r.str(kSampleIdLength, "sample id"));
        std::vector<double> row(m.dim);
        for (auto& v : row) {
            const std::size_t at = r.pos();
            const float f = std::bit_cast<float>(r.u32("value"));
            if (!std::isfinite(f)) throw FormatError("non-finite value in FMX1 payload", at);
            v = f;
        }
        m.rows.push_back(std::move(row));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after FMX1 payload", r.pos());
    return m;
}

void write_feature_matrix(const FeatureMatrix& m, const fs::path& out) {
    const auto bytes = encode_feature_matrix(m);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + out.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + out.string());
}

FeatureMatrix read_feature_matrix(const fs::path& in) { return decode_feature_matrix(read_file_bytes(in)); }

}  // namespace binsonar
