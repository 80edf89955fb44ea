#include "binsonar/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <sstream>

#include "binsonar/error.hpp"
#include "binsonar/rng.hpp"

namespace binsonar {

std::string classifier_name(ClassifierKind kind) { return kind == ClassifierKind::Knn ? "knn" : "rf"; }

ClassifierKind parse_classifier(const std::string& name) {
    if (name == "knn") return ClassifierKind::Knn;
    if (name == "rf") return ClassifierKind::RandomForest;
    throw InvalidArgument("unknown classifier '" + name + "' (expected knn or rf)");
}

void CvConfig::validate() const {
    if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
    if (knn_k < 1) throw InvalidArgument("k must be at least 1");
    if (rf_trees < 1) throw InvalidArgument("random forest needs at least one tree");
}

std::vector<int> make_stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [label, members] : by_class) {
        if (members.size() < static_cast<std::size_t>(folds))
            throw InvalidArgument("class '" + label + "' has " + std::to_string(members.size()) +
                                  " samples, fewer than the " + std::to_string(folds) + " folds requested");
    }
    std::mt19937_64 gen(seed);
    std::vector<int> fold_of(labels.size(), -1);
    std::size_t deal = 0;
    for (auto& [label, members] : by_class) {
        deterministic_shuffle(members.begin(), members.end(), gen);
        for (auto idx : members) fold_of[idx] = static_cast<int>(deal++ % static_cast<std::size_t>(folds));
    }
    return fold_of;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

std::string knn_classify(const TrainingSet& train, std::span<const double> query, int k) {
    if (train.rows.empty()) throw InvalidArgument("k-NN needs at least one training sample");
    if (k < 1) throw InvalidArgument("k must be at least 1");
    std::vector<std::pair<double, std::size_t>> dist(train.rows.size());
    for (std::size_t i = 0; i < train.rows.size(); ++i) {
        if (train.rows[i].size() != query.size())
            throw InvalidArgument("k-NN dimension mismatch: query has " + std::to_string(query.size()) +
                                  " values, training row has " + std::to_string(train.rows[i].size()));
        dist[i] = {squared_distance(train.rows[i], query), i};
    }
    auto closer = [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return train.ids[a.second] < train.ids[b.second];
    };
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end(), closer);
    if (kk == 1) return train.labels[dist[0].second];

    std::map<std::string, int> votes;
    int best = 0;
    for (std::size_t i = 0; i < kk; ++i) best = std::max(best, ++votes[train.labels[dist[i].second]]);
    // Neighbors are sorted nearest first, so the first tied class met wins.
    for (std::size_t i = 0; i < kk; ++i) {
        const auto& label = train.labels[dist[i].second];
        if (votes[label] == best) return label;
    }
    return train.labels[dist[0].second];
}

namespace {

struct SplitChoice {
    bool found = false;
    double impurity = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const TrainingSet& train, const std::vector<int>& label_idx, std::size_t n_classes,
                std::uint64_t seed)
        : train_(train), label_idx_(label_idx), n_classes_(n_classes), gen_(seed),
          dim_(train.rows.front().size()),
          mtry_(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim_))))),
          feature_order_(dim_) {
        std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
    }

    RandomForest::Tree build() {
        const std::size_t n = train_.rows.size();
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = static_cast<std::size_t>(uniform_below(gen_, n));

        RandomForest::Tree tree;
        tree.emplace_back();
        std::vector<std::pair<std::int32_t, std::vector<std::size_t>>> pending;
        pending.emplace_back(0, std::move(sample));
        while (!pending.empty()) {
            auto [node, members] = std::move(pending.back());
            pending.pop_back();
            const auto counts = class_counts(members);
            const auto nonzero = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
            const auto split = nonzero > 1 ? best_split(members) : SplitChoice{};
            if (!split.found) {
                tree[static_cast<std::size_t>(node)].label = plurality(counts);
                continue;
            }
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (auto m : members) (train_.rows[m][split.feature] <= split.threshold ? left : right).push_back(m);
            const auto l = static_cast<std::int32_t>(tree.size());
            tree.emplace_back();
            tree.emplace_back();
            auto& parent = tree[static_cast<std::size_t>(node)];
            parent.feature = static_cast<std::int32_t>(split.feature);
            parent.threshold = split.threshold;
            parent.left = l;
            parent.right = l + 1;
            pending.emplace_back(l + 1, std::move(right));
            pending.emplace_back(l, std::move(left));
        }
        return tree;
    }

private:
    std::vector<std::size_t> class_counts(const std::vector<std::size_t>& members) const {
        std::vector<std::size_t> counts(n_classes_, 0);
        for (auto m : members) ++counts[static_cast<std::size_t>(label_idx_[m])];
        return counts;
    }

    static std::int32_t plurality(const std::vector<std::size_t>& counts) {
        return static_cast<std::int32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }

    static double gini_weighted(const std::vector<std::size_t>& counts, std::size_t total) {
        if (total == 0) return 0.0;
        double sum_sq = 0.0;
        for (auto c : counts) sum_sq += static_cast<double>(c) * static_cast<double>(c);
        return static_cast<double>(total) - sum_sq / static_cast<double>(total);
    }

    void evaluate_feature(const std::vector<std::size_t>& members, std::size_t feature, SplitChoice& best) {
        order_.assign(members.begin(), members.end());
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            const double va = train_.rows[a][feature];
            const double vb = train_.rows[b][feature];
            return va != vb ? va < vb : a < b;
        });
        std::vector<std::size_t> left(n_classes_, 0);
        auto right = class_counts(members);
        const std::size_t n = order_.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto c = static_cast<std::size_t>(label_idx_[order_[i]]);
            ++left[c];
            --right[c];
            const double v = train_.rows[order_[i]][feature];
            const double next = train_.rows[order_[i + 1]][feature];
            if (v == next) continue;
            const double impurity = gini_weighted(left, i + 1) + gini_weighted(right, n - i - 1);
            if (!best.found || impurity < best.impurity) {
                double threshold = v + (next - v) / 2;
                if (!(threshold < next)) threshold = v;
                best = {true, impurity, feature, threshold};
            }
        }
    }

    SplitChoice best_split(const std::vector<std::size_t>& members) {
        SplitChoice best;
        // Partial Fisher-Yates over the feature order: the first mtry draws
        // are the candidates; further draws only happen when none of them
        // can split the node.
        for (std::size_t drawn = 0; drawn < dim_; ++drawn) {
            if (drawn >= mtry_ && best.found) break;
            const auto j = drawn + static_cast<std::size_t>(uniform_below(gen_, dim_ - drawn));
            std::swap(feature_order_[drawn], feature_order_[j]);
            evaluate_feature(members, feature_order_[drawn], best);
        }
        return best;
    }

    const TrainingSet& train_;
    const std::vector<int>& label_idx_;
    std::size_t n_classes_;
    std::mt19937_64 gen_;
    std::size_t dim_;
    std::size_t mtry_;
    std::vector<std::size_t> feature_order_;
    std::vector<std::size_t> order_;
};

}  // namespace

RandomForest rf_train(const TrainingSet& train, const CvConfig& cfg) {
    if (train.rows.empty()) throw InvalidArgument("random forest needs at least one training sample");
    if (cfg.rf_trees < 1) throw InvalidArgument("random forest needs at least one tree");
    RandomForest model;
    model.dim_ = train.rows.front().size();
    for (const auto& r : train.rows)
        if (r.size() != model.dim_) throw InvalidArgument("random forest training rows differ in length");
    model.classes_ = train.labels;
    std::sort(model.classes_.begin(), model.classes_.end());
    model.classes_.erase(std::unique(model.classes_.begin(), model.classes_.end()), model.classes_.end());

    std::vector<int> label_idx(train.labels.size());
    for (std::size_t i = 0; i < train.labels.size(); ++i)
        label_idx[i] = static_cast<int>(std::lower_bound(model.classes_.begin(), model.classes_.end(), train.labels[i]) -
                                        model.classes_.begin());

    model.trees_.resize(static_cast<std::size_t>(cfg.rf_trees));
    if (model.classes_.size() == 1) {
        for (auto& t : model.trees_) t = {RandomForest::Node{}};
        return model;
    }
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < cfg.rf_trees; ++t) {
        TreeBuilder builder(train, label_idx, model.classes_.size(), cfg.seed ^ static_cast<std::uint64_t>(t));
        model.trees_[static_cast<std::size_t>(t)] = builder.build();
    }
    return model;
}

std::string RandomForest::predict(std::span<const double> query) const {
    if (query.size() != dim_)
        throw InvalidArgument("random forest dimension mismatch: query has " + std::to_string(query.size()) +
                              " values, model expects " + std::to_string(dim_));
    std::vector<std::size_t> votes(classes_.size(), 0);
    for (const auto& tree : trees_) {
        std::size_t node = 0;
        while (tree[node].feature >= 0) {
            const auto& n = tree[node];
            node = static_cast<std::size_t>(query[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        }
        ++votes[static_cast<std::size_t>(tree[node].label)];
    }
    return classes_[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
}

std::string rf_predict(const RandomForest& model, std::span<const double> query) { return model.predict(query); }

std::vector<std::string> labels_for(const FeatureMatrix& fm, const Manifest& manifest) {
    std::vector<std::string> labels;
    labels.reserve(fm.ids.size());
    for (const auto& id : fm.ids) {
        const auto idx = manifest.find(id);
        if (idx < 0) throw InvalidArgument("feature matrix sample " + id + " is not in the manifest");
        labels.push_back(manifest.samples[static_cast<std::size_t>(idx)].label);
    }
    return labels;
}

EvalResult cross_validate(const FeatureMatrix& fm, const Manifest& manifest, const CvConfig& cfg) {
    cfg.validate();
    fm.validate();
    const auto labels = labels_for(fm, manifest);
    const auto fold_of = make_stratified_folds(labels, cfg.folds, cfg.seed);

    EvalResult r;
    r.feature_name = fm.feature_name;
    r.classifier = classifier_name(cfg.classifier);
    r.seed = cfg.seed;
    r.folds = cfg.folds;
    r.classes = labels;
    std::sort(r.classes.begin(), r.classes.end());
    r.classes.erase(std::unique(r.classes.begin(), r.classes.end()), r.classes.end());

    std::vector<std::string> predicted(fm.rows.size());
    for (int f = 0; f < cfg.folds; ++f) {
        TrainingSet train;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < fm.rows.size(); ++i) {
            if (fold_of[i] == f) {
                test.push_back(i);
            } else {
                train.rows.emplace_back(fm.rows[i]);
                train.labels.push_back(labels[i]);
                train.ids.push_back(fm.ids[i]);
            }
        }
        if (cfg.classifier == ClassifierKind::Knn) {
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(test.size()); ++t) {
                const auto i = test[static_cast<std::size_t>(t)];
                predicted[i] = knn_classify(train, fm.rows[i], cfg.knn_k);
            }
        } else {
            const auto model = rf_train(train, cfg);
            for (auto i : test) predicted[i] = model.predict(fm.rows[i]);
        }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < fm.rows.size(); ++i) {
        r.predictions.push_back({fm.ids[i], labels[i], predicted[i], fold_of[i]});
        if (predicted[i] == labels[i]) ++correct;
    }
    r.accuracy = fm.rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(fm.rows.size());
    r.confusion = confusion_matrix(r.predictions, r.classes);
    return r;
}

ConfusionMatrix confusion_matrix(const std::vector<PredictionRecord>& predictions,
                                 const std::vector<std::string>& classes) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
    ConfusionMatrix m(classes.size(), std::vector<std::int64_t>(classes.size(), 0));
    for (const auto& p : predictions) {
        const auto t = index.find(p.true_label);
        const auto q = index.find(p.predicted_label);
        if (t == index.end()) throw InvalidArgument("unknown class label '" + p.true_label + "'");
        if (q == index.end()) throw InvalidArgument("unknown class label '" + p.predicted_label + "'");
        ++m[t->second][q->second];
    }
    return m;
}

double mean_fold_accuracy(const EvalResult& r) {
    if (r.folds <= 0) return 0.0;
    std::vector<std::size_t> total(static_cast<std::size_t>(r.folds), 0);
    std::vector<std::size_t> correct(static_cast<std::size_t>(r.folds), 0);
    for (const auto& p : r.predictions) {
        if (p.fold < 0 || p.fold >= r.folds) continue;
        ++total[static_cast<std::size_t>(p.fold)];
        if (p.predicted_label == p.true_label) ++correct[static_cast<std::size_t>(p.fold)];
    }
    double sum = 0.0;
    int used = 0;
    for (std::size_t f = 0; f < total.size(); ++f) {
        if (total[f] == 0) continue;
        sum += static_cast<double>(correct[f]) / static_cast<double>(total[f]);
        ++used;
    }
    return used ? sum / used : 0.0;
}

std::string eval_result_to_json(const EvalResult& r) {
    nlohmann::ordered_json j;
    j["feature"] = r.feature_name;
    j["classifier"] = r.classifier;
    j["seed"] = r.seed;
    j["folds"] = r.folds;
    j["accuracy"] = r.accuracy;
    j["classes"] = r.classes;
    j["confusion"] = r.confusion;
    j["predictions"] = nlohmann::ordered_json::array();
    for (const auto& p : r.predictions)
        j["predictions"].push_back({{"id", p.id}, {"true", p.true_label}, {"pred", p.predicted_label}, {"fold", p.fold}});
    return j.dump(2) + "\n";
}

EvalResult eval_result_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        EvalResult r;
        r.feature_name = j.at("feature").get<std::string>();
        r.classifier = j.at("classifier").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.folds = j.at("folds").get<int>();
        r.accuracy = j.at("accuracy").get<double>();
        r.classes = j.at("classes").get<std::vector<std::string>>();
        r.confusion = j.at("confusion").get<ConfusionMatrix>();
        for (const auto& p : j.at("predictions"))
            r.predictions.push_back({p.at("id").get<std::string>(), p.at("true").get<std::string>(),
                                     p.at("pred").get<std::string>(), p.at("fold").get<int>()});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed evaluation result: ") + e.what());
    }
}

void write_eval_result(const EvalResult& r, const std::filesystem::path& out) {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + out.string());
    f << eval_result_to_json(r);
    if (!f) throw IoError("write failed: " + out.string());
}

EvalResult read_eval_result(const std::filesystem::path& in) {
    std::ifstream f(in, std::ios::binary);
    if (!f) throw IoError("cannot open " + in.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return eval_result_from_json(ss.str());
}

}  // namespace binsonar
