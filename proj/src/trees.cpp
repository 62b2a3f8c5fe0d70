#include <algorithm>
#include <cmath>
#include <numeric>

#include "sarclab/classifiers.hpp"
#include "sarclab/errors.hpp"
#include "sarclab/rng.hpp"

namespace sarclab {

double class_entropy(double w0, double w1) {
    const double w = w0 + w1;
    if (w <= 0.0) return 0.0;
    double h = 0.0;
    for (double wc : {w0, w1}) {
        if (wc > 0.0) {
            const double p = wc / w;
            h -= p * std::log2(p);
        }
    }
    return h;
}

double DecisionTree::predict(const Vector& v) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        if (nd.feature >= v.size())
            throw ValidationError("tree predict: dimension mismatch");
        node = v(nd.feature) < nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

// Per-example targets for growing: classification uses (label, weight),
// regression uses (gradient, hessian) with leaf = sum(g)/sum(h).
struct GrowSpec {
    const Matrix& X;
    const double* target;    // class label (0/1) or gradient
    const double* weight;    // example weight
    const double* hessian;   // nullptr for classification
    int max_depth;           // 0 = unlimited
    int min_samples_split;
    int mtry;                // 0 = all features
    Rng* rng;                // feature subsampling; may be null when mtry=0
};

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double leaf_value(const GrowSpec& spec, const std::vector<int>& idx) {
    double num = 0.0, den = 0.0;
    for (int i : idx) {
        const double w = spec.weight[i];
        num += w * spec.target[i];
        den += spec.hessian ? w * spec.hessian[i] : w;
    }
    if (spec.hessian) return den > 1e-16 ? num / den : 0.0;
    return den > 0.0 ? num / den : 0.0;   // weighted positive-class share
}

// parent impurity minus weighted child impurity; entropy for classification,
// weighted sum of squares for regression
class SplitScorer {
public:
    SplitScorer(const GrowSpec& spec, const std::vector<int>& idx) : spec_(spec) {
        for (int i : idx) {
            const double w = spec.weight[i];
            const double t = spec.target[i];
            w_ += w;
            wt_ += w * t;
            wtt_ += w * t * t;
        }
    }

    double parent_impurity() const { return impurity(w_, wt_, wtt_); }

    // impurity decrease when the left side holds (wl, wlt, wltt)
    double gain(double wl, double wlt, double wltt) const {
        const double wr = w_ - wl;
        const double wrt = wt_ - wlt;
        const double wrtt = wtt_ - wltt;
        if (spec_.hessian) {
            return impurity(w_, wt_, wtt_) - impurity(wl, wlt, wltt) -
                   impurity(wr, wrt, wrtt);
        }
        return impurity(w_, wt_, wtt_) -
               (wl / w_) * impurity(wl, wlt, wltt) -
               (wr / w_) * impurity(wr, wrt, wrtt);
    }

    double total_weight() const { return w_; }
    double positive_weight() const { return wt_; }

private:
    double impurity(double w, double wt, double wtt) const {
        if (w <= 0.0) return 0.0;
        if (spec_.hessian) return wtt - wt * wt / w;   // weighted SSE
        return class_entropy(w - wt, wt);
    }

    const GrowSpec& spec_;
    double w_ = 0.0, wt_ = 0.0, wtt_ = 0.0;
};

Split best_split(const GrowSpec& spec, const std::vector<int>& idx,
                 const std::vector<int>& features) {
    const SplitScorer scorer(spec, idx);
    Split best;

    std::vector<std::pair<double, int>> order(idx.size());
    for (int f : features) {
        for (std::size_t k = 0; k < idx.size(); ++k)
            order[k] = {spec.X(idx[k], f), idx[k]};
        std::sort(order.begin(), order.end());

        double wl = 0.0, wlt = 0.0, wltt = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const int i = order[k].second;
            const double w = spec.weight[i];
            const double t = spec.target[i];
            wl += w;
            wlt += w * t;
            wltt += w * t * t;
            if (order[k].first == order[k + 1].first) continue;
            const double gain = scorer.gain(wl, wlt, wltt);
            if (gain > best.gain + 1e-12) {
                best.feature = f;
                best.threshold = (order[k].first + order[k + 1].first) / 2.0;
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow(const GrowSpec& spec, std::vector<int> idx, int depth,
         std::vector<TreeNode>& nodes) {
    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    const bool depth_capped = spec.max_depth > 0 && depth >= spec.max_depth;
    bool make_leaf =
        depth_capped || static_cast<int>(idx.size()) < spec.min_samples_split;

    Split split;
    if (!make_leaf) {
        std::vector<int> features(static_cast<std::size_t>(spec.X.cols()));
        std::iota(features.begin(), features.end(), 0);
        if (spec.mtry > 0 && spec.mtry < static_cast<int>(features.size())) {
            // partial Fisher-Yates, then ascending order for a stable scan
            for (int k = 0; k < spec.mtry; ++k) {
                std::uniform_int_distribution<std::size_t> pick(
                    static_cast<std::size_t>(k), features.size() - 1);
                std::swap(features[static_cast<std::size_t>(k)],
                          features[pick(*spec.rng)]);
            }
            features.resize(static_cast<std::size_t>(spec.mtry));
            std::sort(features.begin(), features.end());
        }
        split = best_split(spec, idx, features);
        make_leaf = split.feature < 0;
    }

    if (make_leaf) {
        nodes[static_cast<std::size_t>(node_id)].value = leaf_value(spec, idx);
        return node_id;
    }

    std::vector<int> left, right;
    for (int i : idx)
        (spec.X(i, split.feature) < split.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    const int l = grow(spec, std::move(left), depth + 1, nodes);
    const int r = grow(spec, std::move(right), depth + 1, nodes);
    auto& nd = nodes[static_cast<std::size_t>(node_id)];
    nd.feature = split.feature;
    nd.threshold = split.threshold;
    nd.left = l;
    nd.right = r;
    return node_id;
}

std::vector<double> labels_as_double(const std::vector<int>& y) {
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = static_cast<double>(y[i]);
    return t;
}

}  // namespace

DecisionTree train_tree(const TrainingSet& data, const TreeOptions& options) {
    const auto n = data.X.rows();
    if (n == 0) throw ValidationError("train_tree: empty training set");

    const std::vector<double> target = labels_as_double(data.y);
    GrowSpec spec{data.X,       target.data(),
                  data.weights.data(), nullptr,
                  options.max_depth,   options.min_samples_split,
                  0,                   nullptr};
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);

    DecisionTree tree;
    grow(spec, std::move(idx), 0, tree.nodes);
    return tree;
}

TreeEnsembleModel train_random_forest(const TrainingSet& data,
                                      const ForestOptions& options,
                                      std::uint64_t seed) {
    const auto n = data.X.rows();
    if (n == 0) throw ValidationError("train_random_forest: empty training set");
    const int d = static_cast<int>(data.X.cols());
    const int mtry =
        options.mtry >= 0
            ? options.mtry
            : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

    const std::vector<double> target = labels_as_double(data.y);
    TreeEnsembleModel model;
    model.kind = EnsembleKind::random_forest;
    model.trees.reserve(static_cast<std::size_t>(options.n_trees));

    for (int t = 0; t < options.n_trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<int> idx(static_cast<std::size_t>(n));
        if (options.bootstrap) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
            for (auto& i : idx) i = pick(rng);
            std::sort(idx.begin(), idx.end());
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }

        GrowSpec spec{data.X,       target.data(),
                      data.weights.data(), nullptr,
                      options.max_depth,   2,
                      mtry,                &rng};
        DecisionTree tree;
        grow(spec, std::move(idx), 0, tree.nodes);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

TreeEnsembleModel train_gradient_boosting(const TrainingSet& data,
                                          const BoostOptions& options) {
    const auto n = data.X.rows();
    if (n == 0)
        throw ValidationError("train_gradient_boosting: empty training set");

    double w_sum = 0.0, w_pos = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        w_sum += data.weights(i);
        if (data.y[static_cast<std::size_t>(i)] == 1) w_pos += data.weights(i);
    }
    const double rate =
        std::clamp(w_pos / w_sum, 1e-12, 1.0 - 1e-12);

    TreeEnsembleModel model;
    model.kind = EnsembleKind::gradient_boosting;
    model.learning_rate = options.learning_rate;
    model.base_score = std::log(rate / (1.0 - rate));
    model.trees.reserve(static_cast<std::size_t>(options.n_trees));

    Vector score = Vector::Constant(n, model.base_score);
    std::vector<double> grad(static_cast<std::size_t>(n));
    std::vector<double> hess(static_cast<std::size_t>(n));

    auto record_loss = [&] {
        double loss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = score(i);
            const double sp =
                s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
            loss += data.weights(i) *
                    (sp - data.y[static_cast<std::size_t>(i)] * s);
        }
        model.loss_curve.push_back(loss);
    };
    record_loss();

    for (int round = 0; round < options.n_trees; ++round) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-score(i)));
            grad[static_cast<std::size_t>(i)] =
                data.y[static_cast<std::size_t>(i)] - p;   // negative gradient
            hess[static_cast<std::size_t>(i)] = std::max(p * (1.0 - p), 1e-16);
        }
        GrowSpec spec{data.X,       grad.data(),
                      data.weights.data(), hess.data(),
                      options.max_depth,   2,
                      0,                   nullptr};
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);

        DecisionTree tree;
        grow(spec, std::move(idx), 0, tree.nodes);
        for (Eigen::Index i = 0; i < n; ++i)
            score(i) +=
                options.learning_rate * tree.predict(data.X.row(i).transpose());
        model.trees.push_back(std::move(tree));
        record_loss();
    }
    return model;
}

Prediction predict_ensemble(const TreeEnsembleModel& model, const Vector& v) {
    if (model.kind == EnsembleKind::random_forest) {
        if (model.trees.empty())
            throw ValidationError("predict_ensemble: forest has no trees");
        double p = 0.0;
        for (const auto& tree : model.trees) p += tree.predict(v);
        p /= static_cast<double>(model.trees.size());
        return {p >= 0.5 ? 1 : 0, p};
    }
    double s = model.base_score;
    for (const auto& tree : model.trees)
        s += model.learning_rate * tree.predict(v);
    const double p = 1.0 / (1.0 + std::exp(-s));
    return {p >= 0.5 ? 1 : 0, p};
}

Prediction predict(const ClassifierModel& model, const Vector& v) {
    return std::visit(
        [&](const auto& m) -> Prediction {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LogisticModel>)
                return predict_logistic(m, v);
            else if constexpr (std::is_same_v<T, SvmModel>)
                return predict_svm(m, v);
            else
                return predict_ensemble(m, v);
        },
        model);
}

}  // namespace sarclab
