#include "binsonar/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "binsonar/classify.hpp"
#include "binsonar/corpus.hpp"
#include "binsonar/descriptors.hpp"
#include "binsonar/error.hpp"
#include "binsonar/ortho.hpp"
#include "binsonar/staticfeat.hpp"

namespace binsonar::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + p.string());
    f << text;
    if (!f) throw IoError("write failed: " + p.string());
}

std::vector<EvalResult> load_results(const std::vector<fs::path>& paths) {
    std::vector<EvalResult> results;
    for (const auto& p : paths) results.push_back(read_eval_result(p));
    return results;
}

}  // namespace

bool is_static_feature(const std::string& feature) {
    return feature == "bigrams" || feature == "pehash" || feature == "gist";
}

std::vector<double> extract_static(std::span<const std::uint8_t> bytes, const std::string& feature) {
    if (feature == "bigrams") return byte_bigrams(bytes);
    if (feature == "pehash") return pehash_vector(parse_pe_summary(bytes));
    if (feature == "gist") return gist_vector(binary_to_image(bytes));
    throw InvalidArgument("unknown static feature '" + feature + "'");
}

fs::path exclusion_path(const fs::path& out) { return fs::path(out.string() + ".excluded.tsv"); }

std::uint64_t effective_seed(std::uint64_t flag_seed) {
    const char* env = std::getenv("BINSONAR_SEED");
    if (!env || !*env) return flag_seed;
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw InvalidArgument(std::string("BINSONAR_SEED is not an unsigned integer: ") + env);
    return v;
}

int run_ingest(const IngestOptions& o, std::ostream& log) {
    const auto m = ingest_directory(o.dir, o.labels, effective_seed(o.seed));
    save_manifest(m, o.out);
    log << "ingested " << m.samples.size() << " samples in " << m.classes.size() << " classes -> " << o.out.string()
        << '\n';
    return kOk;
}

int run_extract(const ExtractOptions& o, std::ostream& log) {
    const bool is_static = is_static_feature(o.feature);
    DescriptorConfig cfg;
    if (!is_static) {
        cfg.kind = parse_kind(o.feature);
        cfg.expanded = o.expanded;
        cfg.segments = o.segments.value_or(0);
        cfg.bytes_per_sample = o.bytes_per_sample;
        cfg.validate();
        if (o.segments && *o.segments == 0) throw InvalidArgument("--segments must be positive");
    } else if (o.expanded || o.segments || o.bytes_per_sample != 1) {
        throw InvalidArgument("--expanded, --segments and --bytes-per-sample apply only to audio descriptors");
    }
    if (o.workers < 0) throw InvalidArgument("--workers must be >= 0");

    const auto manifest = load_manifest(o.manifest);
    const auto n = manifest.samples.size();
    std::vector<std::vector<double>> rows(n);
    std::vector<std::string> failures(n);
    const int threads = o.workers > 0 ? o.workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const auto& s = manifest.samples[static_cast<std::size_t>(i)];
        try {
            const auto bytes = read_file_bytes(s.path);
            rows[static_cast<std::size_t>(i)] =
                is_static ? extract_static(bytes, o.feature) : extract_feature(bytes, cfg).values;
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] = e.what();
            if (failures[static_cast<std::size_t>(i)].empty()) failures[static_cast<std::size_t>(i)] = "unknown error";
        }
    }

    FeatureMatrix fm;
    fm.feature_name = is_static ? o.feature : cfg.feature_name();
    std::ostringstream excluded;
    std::size_t n_failed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = manifest.samples[i];
        if (!failures[i].empty()) {
            ++n_failed;
            excluded << s.id << '\t' << s.path << '\t' << failures[i] << '\n';
            log << "excluded " << s.path << ": " << failures[i] << '\n';
            continue;
        }
        fm.ids.push_back(s.id);
        fm.rows.push_back(std::move(rows[i]));
    }
    if (fm.rows.empty()) {
        log << "error: feature extraction failed for all " << n << " samples\n";
        return kFailure;
    }
    fm.dim = static_cast<std::uint32_t>(fm.rows.front().size());
    write_feature_matrix(fm, o.out);
    write_text(exclusion_path(o.out), excluded.str());
    log << "extracted " << fm.feature_name << ": " << fm.rows.size() << " x " << fm.dim << " -> " << o.out.string();
    if (n_failed) log << " (" << n_failed << " excluded, see " << exclusion_path(o.out).string() << ")";
    log << '\n';
    return kOk;
}

int run_eval(const EvalOptions& o, std::ostream& out, std::ostream& log) {
    CvConfig cfg;
    cfg.folds = o.folds;
    cfg.seed = effective_seed(o.seed);
    cfg.classifier = parse_classifier(o.classifier);
    cfg.knn_k = o.k;
    cfg.rf_trees = o.trees;
    cfg.validate();
    const auto fm = read_feature_matrix(o.features);
    const auto manifest = load_manifest(o.manifest);
    const auto result = cross_validate(fm, manifest, cfg);
    write_eval_result(result, o.out);
    out << "feature " << result.feature_name << ", classifier " << result.classifier << ", " << result.folds
        << " folds, seed " << result.seed << '\n';
    out << "accuracy (pooled): " << fixed4(result.accuracy) << '\n';
    out << "accuracy (mean of folds): " << fixed4(mean_fold_accuracy(result)) << '\n';
    log << "wrote " << o.out.string() << '\n';
    return kOk;
}

int run_ortho(const OrthoOptions& o, std::ostream& out, std::ostream& log) {
    if (o.results.size() < 2) {
        log << "usage error: ortho needs at least two --results files\n";
        return kUsage;
    }
    const auto results = load_results(o.results);
    const auto analysis = jfs_matrix(results);
    const auto fused = fuse_majority(results);
    fs::create_directories(o.out_dir);
    write_text(o.out_dir / "error_counts.csv", error_counts_csv(analysis, results));
    write_text(o.out_dir / "error_matrix.csv", error_matrix_csv(analysis));
    write_text(o.out_dir / "jfs.csv", jfs_csv(analysis));
    write_text(o.out_dir / "report.md", markdown_report(analysis, results, fused));
    out << jfs_csv(analysis);
    log << "wrote error_counts.csv, error_matrix.csv, jfs.csv, report.md to " << o.out_dir.string() << '\n';
    return kOk;
}

int run_fuse(const FuseOptions& o, std::ostream& out, std::ostream& log) {
    if (o.results.size() < 2) {
        log << "usage error: fuse needs at least two --results files\n";
        return kUsage;
    }
    const auto fused = fuse_majority(load_results(o.results));
    write_eval_result(fused, o.out);
    out << "fused accuracy (pooled): " << fixed4(fused.accuracy) << '\n';
    out << "fused accuracy (mean of folds): " << fixed4(mean_fold_accuracy(fused)) << '\n';
    log << "wrote " << o.out.string() << '\n';
    return kOk;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"binsonar: classify binaries through audio descriptors and score feature-set orthogonality"};
    app.require_subcommand(1);

    IngestOptions ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Hash and label a directory of samples");
    ingest_cmd->add_option("--dir", ingest.dir, "Sample root directory")->required();
    ingest_cmd->add_option("--labels", ingest.labels, "CSV with header filename,label")->required();
    ingest_cmd->add_option("--out", ingest.out, "Manifest JSON to write")->required();
    ingest_cmd->add_option("--seed", ingest.seed, "Seed stored in the manifest");

    ExtractOptions extract;
    std::size_t segments = 0;
    auto* extract_cmd = app.add_subcommand("extract", "Compute one feature set over a manifest");
    extract_cmd->add_option("--manifest", extract.manifest)->required();
    extract_cmd->add_option("--feature", extract.feature)
        ->required()
        ->check(CLI::IsMember({"mfcc", "melspec", "chroma-stft", "chroma-cqt", "chroma-cens", "bigrams", "pehash", "gist"}));
    auto* expanded_flag = extract_cmd->add_flag("--expanded", extract.expanded, "Segment-wise means instead of a global mean");
    extract_cmd->add_option("--segments", segments, "Segment count for --expanded")->needs(expanded_flag);
    extract_cmd->add_option("--bytes-per-sample", extract.bytes_per_sample)->check(CLI::IsMember({1, 2, 4}));
    extract_cmd->add_option("--out", extract.out, "FMX1 file to write")->required();
    extract_cmd->add_option("--workers", extract.workers, "Worker threads (0 = auto)");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Stratified k-fold cross-validation of one feature matrix");
    eval_cmd->add_option("--features", eval.features)->required();
    eval_cmd->add_option("--manifest", eval.manifest)->required();
    eval_cmd->add_option("--classifier", eval.classifier)->check(CLI::IsMember({"knn", "rf"}));
    eval_cmd->add_option("--k", eval.k);
    eval_cmd->add_option("--trees", eval.trees);
    eval_cmd->add_option("--folds", eval.folds);
    eval_cmd->add_option("--seed", eval.seed);
    eval_cmd->add_option("--out", eval.out, "EvalResult JSON to write")->required();

    OrthoOptions ortho;
    std::vector<std::string> ortho_results;
    auto* ortho_cmd = app.add_subcommand("ortho", "Error analysis and JFS matrix across evaluation results");
    ortho_cmd->add_option("--results", ortho_results, "Comma-separated EvalResult JSON files")->required()->delimiter(',');
    ortho_cmd->add_option("--out-dir", ortho.out_dir)->required();

    FuseOptions fuse;
    std::vector<std::string> fuse_results;
    auto* fuse_cmd = app.add_subcommand("fuse", "Majority-vote fusion of evaluation results");
    fuse_cmd->add_option("--results", fuse_results, "Comma-separated EvalResult JSON files")->required()->delimiter(',');
    fuse_cmd->add_option("--out", fuse.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*ingest_cmd) return run_ingest(ingest, std::cerr);
        if (*extract_cmd) {
            if (extract_cmd->count("--segments")) extract.segments = segments;
            return run_extract(extract, std::cerr);
        }
        if (*eval_cmd) return run_eval(eval, std::cout, std::cerr);
        if (*ortho_cmd) {
            ortho.results.assign(ortho_results.begin(), ortho_results.end());
            return run_ortho(ortho, std::cout, std::cerr);
        }
        if (*fuse_cmd) {
            fuse.results.assign(fuse_results.begin(), fuse_results.end());
            return run_fuse(fuse, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}

}  // namespace binsonar::cli
