#ifndef SARCLAB_CLASSIFIERS_HPP
#define SARCLAB_CLASSIFIERS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sarclab/linalg.hpp"
#include "sarclab/semantic_space.hpp"

namespace sarclab {

struct TrainingSet {
    Matrix X;                    // n x d, one example per row
    std::vector<int> y;          // 0/1
    Vector weights;              // per-example multipliers
    std::pair<double, double> class_weights{1.0, 1.0};
};

/// w_c = n / (2 * n_c) for c in {0, 1}.
std::pair<double, double> balanced_class_weights(const std::vector<int>& labels);

TrainingSet make_training_set(const std::vector<DocumentVector>& vectors,
                              const std::vector<int>& labels, bool balanced);

struct Prediction {
    int label = 0;
    double score = 0.0;   // probability for logistic/ensembles, margin for svm
};

// ---------------------------------------------------------------- logistic

enum class Penalty { l1, l2 };

struct LogisticOptions {
    double tol_l2 = 1e-6;    // gradient norm
    double tol_l1 = 1e-5;    // pseudo-gradient infinity norm
    int max_iter = 1000;
};

struct LogisticModel {
    Vector beta;             // d+1, last entry is the intercept
    Penalty penalty = Penalty::l1;
    double C = 10.0;         // lambda = 1/C
    std::vector<double> objective_trace;   // per accepted step, not serialized
};

/// Weighted regularized negative log-likelihood; the intercept is not
/// penalized.
double logistic_objective(const TrainingSet& data, const Vector& beta,
                          Penalty penalty, double C);

/// Gradient of the objective; defined everywhere for L2, and away from
/// zero coefficients for L1.
Vector logistic_gradient(const TrainingSet& data, const Vector& beta,
                         Penalty penalty, double C);

LogisticModel train_logistic(const TrainingSet& data, Penalty penalty, double C,
                             const LogisticOptions& options = {});

Prediction predict_logistic(const LogisticModel& model, const Vector& v);

// --------------------------------------------------------------------- svm

double gaussian_kernel(const Vector& x, const Vector& y, double gamma);

struct SvmOptions {
    double tol = 1e-3;                 // KKT violation gap
    std::uint64_t max_epochs = 10000;  // cap = max_epochs * n pair updates
    std::size_t cache_bytes = 256ull << 20;
};

struct SvmModel {
    Matrix support_vectors;   // n_sv x d
    Vector dual_coefs;        // alpha_i * y'_i, y' in {-1,+1}
    double bias = 0.0;
    double gamma = 1.0;
    double C = 100.0;
};

SvmModel train_svm(const TrainingSet& data, double C, double gamma,
                   const SvmOptions& options = {});

double svm_decision(const SvmModel& model, const Vector& v);

Prediction predict_svm(const SvmModel& model, const Vector& v);

// ------------------------------------------------------------------- trees

struct TreeNode {
    int feature = -1;         // -1 marks a leaf
    double threshold = 0.0;   // left subtree takes x[feature] < threshold
    int left = -1;
    int right = -1;
    double value = 0.0;       // leaf: P(class 1) or regression value

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    double predict(const Vector& v) const;
};

struct TreeOptions {
    int max_depth = 0;          // 0 = unlimited
    int min_samples_split = 2;
};

/// Greedy binary splits maximizing weighted information gain (entropy).
DecisionTree train_tree(const TrainingSet& data, const TreeOptions& options = {});

/// Weighted class entropy in bits.
double class_entropy(double w0, double w1);

enum class EnsembleKind { random_forest, gradient_boosting };

struct ForestOptions {
    int n_trees = 100;
    int max_depth = 0;
    int mtry = -1;              // -1 = ceil(sqrt(d)), 0 = all features
    bool bootstrap = true;
};

struct BoostOptions {
    int n_trees = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
};

struct TreeEnsembleModel {
    EnsembleKind kind = EnsembleKind::random_forest;
    std::vector<DecisionTree> trees;
    double learning_rate = 0.0;   // boosting only
    double base_score = 0.0;      // boosting only, log-odds
    std::vector<double> loss_curve;   // boosting training loss, not serialized
};

TreeEnsembleModel train_random_forest(const TrainingSet& data,
                                      const ForestOptions& options,
                                      std::uint64_t seed);

TreeEnsembleModel train_gradient_boosting(const TrainingSet& data,
                                          const BoostOptions& options = {});

Prediction predict_ensemble(const TreeEnsembleModel& model, const Vector& v);

// ---------------------------------------------------------------- dispatch

using ClassifierModel = std::variant<LogisticModel, SvmModel, TreeEnsembleModel>;

Prediction predict(const ClassifierModel& model, const Vector& v);

}  // namespace sarclab

#endif
