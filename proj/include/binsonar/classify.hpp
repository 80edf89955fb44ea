#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "binsonar/corpus.hpp"

namespace binsonar {

enum class ClassifierKind { Knn, RandomForest };

std::string classifier_name(ClassifierKind kind);
ClassifierKind parse_classifier(const std::string& name);

struct CvConfig {
    int folds = 10;
    std::uint64_t seed = 0;
    ClassifierKind classifier = ClassifierKind::Knn;
    int knn_k = 1;
    int rf_trees = 100;

    void validate() const;
};

struct PredictionRecord {
    std::string id;
    std::string true_label;
    std::string predicted_label;
    int fold = 0;

    bool operator==(const PredictionRecord&) const = default;
};

using ConfusionMatrix = std::vector<std::vector<std::int64_t>>;

struct EvalResult {
    std::string feature_name;
    std::string classifier;
    std::uint64_t seed = 0;
    int folds = 0;
    double accuracy = 0.0;
    std::vector<std::string> classes;  // sorted
    ConfusionMatrix confusion;
    std::vector<PredictionRecord> predictions;

    bool operator==(const EvalResult&) const = default;
};

/// Per-class deterministic shuffle, then round-robin dealing to folds. The
/// dealing position carries over between classes so fold sizes stay
/// balanced. Classes are visited in sorted order.
std::vector<int> make_stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed);

/// Training data view shared by both classifiers.
struct TrainingSet {
    std::vector<std::span<const double>> rows;
    std::vector<std::string> labels;
    std::vector<std::string> ids;  // tie-breaking key for k-NN
};

/// Euclidean k-NN. Neighbors are ordered by (distance, id); k > 1 takes a
/// majority vote, ties going to the tied class with the nearest member.
std::string knn_classify(const TrainingSet& train, std::span<const double> query, int k);

/// CART forest (Gini, bootstrap, ceil(sqrt(dim)) candidate features per
/// split, grown to purity). Tree t is seeded with seed ^ t.
class RandomForest {
public:
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t label = 0;     // class index for leaves
    };
    using Tree = std::vector<Node>;

    const std::vector<std::string>& classes() const { return classes_; }
    const std::vector<Tree>& trees() const { return trees_; }

    std::string predict(std::span<const double> query) const;

private:
    friend RandomForest rf_train(const TrainingSet&, const CvConfig&);
    std::vector<std::string> classes_;
    std::vector<Tree> trees_;
    std::size_t dim_ = 0;
};

RandomForest rf_train(const TrainingSet& train, const CvConfig& cfg);
std::string rf_predict(const RandomForest& model, std::span<const double> query);

/// Rows of `fm` with labels looked up in `manifest`; throws naming the first
/// id missing from the manifest.
std::vector<std::string> labels_for(const FeatureMatrix& fm, const Manifest& manifest);

/// Trains on all folds but one, predicts the held-out fold, pools the
/// predictions of every fold.
EvalResult cross_validate(const FeatureMatrix& fm, const Manifest& manifest, const CvConfig& cfg);

/// Entry (i, j) counts samples of class i predicted as class j.
ConfusionMatrix confusion_matrix(const std::vector<PredictionRecord>& predictions,
                                 const std::vector<std::string>& classes);

/// Mean of per-fold accuracies, reported next to the pooled accuracy.
double mean_fold_accuracy(const EvalResult& r);

std::string eval_result_to_json(const EvalResult& r);
EvalResult eval_result_from_json(const std::string& text);
void write_eval_result(const EvalResult& r, const std::filesystem::path& out);
EvalResult read_eval_result(const std::filesystem::path& in);

}  // namespace binsonar
