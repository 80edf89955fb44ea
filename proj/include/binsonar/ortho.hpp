#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "binsonar/classify.hpp"

namespace binsonar {

using IntMatrix = std::vector<std::vector<std::int64_t>>;
using RealMatrix = std::vector<std::vector<double>>;

struct ErrorAnalysis {
    std::vector<std::string> feature_names;
    std::vector<std::int64_t> error_counts;
    IntMatrix E;         // E[i][j]: wrong under i, right under j
    RealMatrix E_N;      // rows of E divided by error_counts[i]
    RealMatrix jfs;      // symmetric, diagonal 0
};

/// Misclassified ids per result. All results must cover the same ids.
std::vector<std::set<std::string>> collect_error_sets(const std::vector<EvalResult>& results);

/// E[i][j] = |set_i \ set_j|, zero diagonal.
IntMatrix error_analysis_matrix(const std::vector<std::set<std::string>>& sets);

/// Row i divided by error_counts[i]. A feature set with no errors gets 1.0
/// off the diagonal.
RealMatrix normalize_error_matrix(const IntMatrix& E, const std::vector<std::int64_t>& error_counts);

/// (2 - sqrt((1 - E_N[i][j])^2 + (1 - E_N[j][i])^2)) / 2, for i != j.
double jfs_pair(const RealMatrix& E_N, std::size_t i, std::size_t j);

/// E_N and JFS from already tabulated counts and E.
ErrorAnalysis analysis_from_counts(std::vector<std::string> names, std::vector<std::int64_t> error_counts,
                                   IntMatrix E);

ErrorAnalysis jfs_matrix(const std::vector<EvalResult>& results);

/// Per-sample plurality vote. Ties go to the vote of the most accurate
/// result among the tied labels; equally accurate results defer to
/// class-name order.
EvalResult fuse_majority(const std::vector<EvalResult>& results);

std::string jfs_csv(const ErrorAnalysis& a);
std::string error_matrix_csv(const ErrorAnalysis& a);
std::string error_counts_csv(const ErrorAnalysis& a, const std::vector<EvalResult>& results);
std::string markdown_report(const ErrorAnalysis& a, const std::vector<EvalResult>& results, const EvalResult& fused);

}  // namespace binsonar
