#include "binsonar/ortho.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "binsonar/error.hpp"

namespace binsonar {

namespace {

std::set<std::string> id_set(const EvalResult& r) {
    std::set<std::string> ids;
    for (const auto& p : r.predictions) ids.insert(p.id);
    return ids;
}

void require_same_ids(const std::vector<EvalResult>& results) {
    if (results.empty()) return;
    const auto reference = id_set(results.front());
    for (std::size_t i = 1; i < results.size(); ++i) {
        const auto other = id_set(results[i]);
        if (other == reference) continue;
        std::vector<std::string> diff;
        std::set_symmetric_difference(reference.begin(), reference.end(), other.begin(), other.end(),
                                      std::back_inserter(diff));
        std::string msg = "results '" + results.front().feature_name + "' and '" + results[i].feature_name +
                          "' cover different samples; symmetric difference (" + std::to_string(diff.size()) + "):";
        for (std::size_t k = 0; k < diff.size() && k < 20; ++k) msg += " " + diff[k];
        if (diff.size() > 20) msg += " ...";
        throw InvalidArgument(msg);
    }
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

std::vector<std::set<std::string>> collect_error_sets(const std::vector<EvalResult>& results) {
    require_same_ids(results);
    std::vector<std::set<std::string>> sets;
    for (const auto& r : results) {
        std::set<std::string> wrong;
        for (const auto& p : r.predictions)
            if (p.predicted_label != p.true_label) wrong.insert(p.id);
        sets.push_back(std::move(wrong));
    }
    return sets;
}

IntMatrix error_analysis_matrix(const std::vector<std::set<std::string>>& sets) {
    const auto n = sets.size();
    IntMatrix E(n, std::vector<std::int64_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                E[i][j] = static_cast<std::int64_t>(std::count_if(
                    sets[i].begin(), sets[i].end(), [&](const std::string& id) { return !sets[j].count(id); }));
    return E;
}

RealMatrix normalize_error_matrix(const IntMatrix& E, const std::vector<std::int64_t>& error_counts) {
    const auto n = E.size();
    if (error_counts.size() != n) throw InvalidArgument("error counts and E differ in size");
    RealMatrix EN(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (error_counts[i] == 0) {
                EN[i][j] = 1.0;
                continue;
            }
            if (E[i][j] > error_counts[i] || E[i][j] < 0)
                throw InvalidArgument("E[" + std::to_string(i) + "][" + std::to_string(j) +
                                      "] exceeds the error count of row " + std::to_string(i));
            EN[i][j] = static_cast<double>(E[i][j]) / static_cast<double>(error_counts[i]);
        }
    }
    return EN;
}

double jfs_pair(const RealMatrix& E_N, std::size_t i, std::size_t j) {
    if (i == j) throw InvalidArgument("JFS is defined only for distinct feature sets");
    const double a = 1.0 - E_N[i][j];
    const double b = 1.0 - E_N[j][i];
    return (2.0 - std::sqrt(a * a + b * b)) / 2.0;
}

ErrorAnalysis analysis_from_counts(std::vector<std::string> names, std::vector<std::int64_t> error_counts, IntMatrix E) {
    ErrorAnalysis a;
    a.feature_names = std::move(names);
    a.error_counts = std::move(error_counts);
    a.E = std::move(E);
    a.E_N = normalize_error_matrix(a.E, a.error_counts);
    const auto n = a.E.size();
    a.jfs.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a.jfs[i][j] = a.jfs[j][i] = jfs_pair(a.E_N, i, j);
    return a;
}

ErrorAnalysis jfs_matrix(const std::vector<EvalResult>& results) {
    if (results.size() < 2) throw InvalidArgument("orthogonality analysis needs at least two results");
    const auto sets = collect_error_sets(results);
    std::vector<std::string> names;
    std::vector<std::int64_t> counts;
    for (std::size_t i = 0; i < results.size(); ++i) {
        names.push_back(results[i].feature_name + "/" + results[i].classifier);
        counts.push_back(static_cast<std::int64_t>(sets[i].size()));
    }
    return analysis_from_counts(std::move(names), std::move(counts), error_analysis_matrix(sets));
}

EvalResult fuse_majority(const std::vector<EvalResult>& results) {
    if (results.size() < 2) throw InvalidArgument("fusion needs at least two results");
    require_same_ids(results);

    std::vector<std::size_t> by_accuracy(results.size());
    std::iota(by_accuracy.begin(), by_accuracy.end(), std::size_t{0});
    std::stable_sort(by_accuracy.begin(), by_accuracy.end(),
                     [&](std::size_t a, std::size_t b) { return results[a].accuracy > results[b].accuracy; });

    std::vector<std::map<std::string, const PredictionRecord*>> lookup(results.size());
    for (std::size_t r = 0; r < results.size(); ++r)
        for (const auto& p : results[r].predictions) lookup[r][p.id] = &p;

    const auto& base = results.front();
    EvalResult fused;
    fused.feature_name = "fusion(";
    for (std::size_t r = 0; r < results.size(); ++r)
        fused.feature_name += (r ? "+" : "") + results[r].feature_name;
    fused.feature_name += ")";
    fused.classifier = "majority";
    fused.seed = base.seed;
    fused.folds = base.folds;

    std::set<std::string> classes;
    for (const auto& r : results) classes.insert(r.classes.begin(), r.classes.end());

    std::size_t correct = 0;
    for (const auto& p : base.predictions) {
        std::map<std::string, int> votes;
        for (std::size_t r = 0; r < results.size(); ++r) ++votes[lookup[r].at(p.id)->predicted_label];
        int top = 0;
        for (const auto& [label, count] : votes) top = std::max(top, count);
        std::string choice;
        double choice_acc = 0.0;
        for (auto r : by_accuracy) {
            const auto& label = lookup[r].at(p.id)->predicted_label;
            if (votes[label] != top) continue;
            if (choice.empty()) {
                choice = label;
                choice_acc = results[r].accuracy;
            } else if (results[r].accuracy == choice_acc) {
                choice = std::min(choice, label);
            } else {
                break;
            }
        }
        fused.predictions.push_back({p.id, p.true_label, choice, p.fold});
        classes.insert(p.true_label);
        classes.insert(choice);
        if (choice == p.true_label) ++correct;
    }
    fused.classes.assign(classes.begin(), classes.end());
    fused.accuracy = fused.predictions.empty() ? 0.0
                                               : static_cast<double>(correct) / static_cast<double>(fused.predictions.size());
    fused.confusion = confusion_matrix(fused.predictions, fused.classes);
    return fused;
}

std::string jfs_csv(const ErrorAnalysis& a) {
    std::ostringstream out;
    out << "feature";
    for (const auto& n : a.feature_names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < a.feature_names.size(); ++i) {
        out << a.feature_names[i];
        for (std::size_t j = 0; j < a.feature_names.size(); ++j) out << ',' << fixed(a.jfs[i][j], 4);
        out << '\n';
    }
    return out.str();
}

std::string error_matrix_csv(const ErrorAnalysis& a) {
    std::ostringstream out;
    out << "feature";
    for (const auto& n : a.feature_names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < a.feature_names.size(); ++i) {
        out << a.feature_names[i];
        for (std::size_t j = 0; j < a.feature_names.size(); ++j) out << ',' << a.E[i][j];
        out << '\n';
    }
    return out.str();
}

std::string error_counts_csv(const ErrorAnalysis& a, const std::vector<EvalResult>& results) {
    std::ostringstream out;
    out << "feature,accuracy,errors,samples\n";
    for (std::size_t i = 0; i < a.feature_names.size(); ++i)
        out << a.feature_names[i] << ',' << fixed(results[i].accuracy, 4) << ',' << a.error_counts[i] << ','
            << results[i].predictions.size() << '\n';
    return out.str();
}

namespace {

void markdown_matrix(std::ostringstream& out, const std::vector<std::string>& names, auto&& cell) {
    out << "| |";
    for (const auto& n : names) out << ' ' << n << " |";
    out << "\n|---|";
    for (std::size_t j = 0; j < names.size(); ++j) out << "---|";
    out << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << "| **" << names[i] << "** |";
        for (std::size_t j = 0; j < names.size(); ++j) out << ' ' << (i == j ? std::string("-") : cell(i, j)) << " |";
        out << '\n';
    }
}

void markdown_confusion(std::ostringstream& out, const EvalResult& r) {
    out << "| true \\ pred |";
    for (const auto& c : r.classes) out << ' ' << c << " |";
    out << "\n|---|";
    for (std::size_t j = 0; j < r.classes.size(); ++j) out << "---|";
    out << '\n';
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
        out << "| **" << r.classes[i] << "** |";
        for (std::size_t j = 0; j < r.classes.size(); ++j) out << ' ' << r.confusion[i][j] << " |";
        out << '\n';
    }
}

}  // namespace

std::string markdown_report(const ErrorAnalysis& a, const std::vector<EvalResult>& results, const EvalResult& fused) {
    std::ostringstream out;
    const auto total = results.empty() ? 0 : results.front().predictions.size();
    out << "# Orthogonality report\n\n## Classification errors\n\n";
    out << "| Feature set | Accuracy | Mean fold accuracy | # incorrectly classified (out of " << total << ") |\n";
    out << "|---|---|---|---|\n";
    for (std::size_t i = 0; i < results.size(); ++i)
        out << "| " << a.feature_names[i] << " | " << fixed(results[i].accuracy, 4) << " | "
            << fixed(mean_fold_accuracy(results[i]), 4) << " | " << a.error_counts[i] << " |\n";

    out << "\n## Error analysis matrix E\n\nRow i, column j: misclassified by i but correctly classified by j.\n\n";
    markdown_matrix(out, a.feature_names, [&](std::size_t i, std::size_t j) { return std::to_string(a.E[i][j]); });
    out << "\n## Normalized error analysis matrix E_N\n\n";
    markdown_matrix(out, a.feature_names, [&](std::size_t i, std::size_t j) { return fixed(a.E_N[i][j], 4); });
    out << "\n## JFS score matrix\n\n";
    markdown_matrix(out, a.feature_names, [&](std::size_t i, std::size_t j) { return fixed(a.jfs[i][j], 4); });

    out << "\n## Majority-vote fusion\n\nAccuracy " << fixed(fused.accuracy, 4) << " ("
        << fixed(mean_fold_accuracy(fused), 4) << " mean over folds).\n\n";
    markdown_confusion(out, fused);

    out << "\n## Confusion matrices\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        out << "\n### " << a.feature_names[i] << "\n\n";
        markdown_confusion(out, results[i]);
    }
    return out.str();
}

}  // namespace binsonar
