#ifndef SARCLAB_EVALUATION_HPP
#define SARCLAB_EVALUATION_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sarclab/classifiers.hpp"
#include "sarclab/corpus.hpp"
#include "sarclab/semantic_space.hpp"

namespace sarclab {

enum class ClassifierKind { svm, logistic, random_forest, gradient_boosting };

const char* classifier_name(ClassifierKind kind);
ClassifierKind classifier_from_name(const std::string& name);

struct LogisticParams {
    Penalty penalty = Penalty::l1;
    double C = 10.0;
};

struct SvmParams {
    double C = 100.0;
    double gamma = 0.0;   // 0 = 1/rank
};

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;
};

struct BoostParams {
    int n_trees = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
};

struct ExperimentConfig {
    Variant variant = Variant::statistical;
    ClassifierKind classifier = ClassifierKind::logistic;
    std::vector<int> rank_grid = {10, 20, 40, 60, 80, 100, 150, 200};
    int k_folds = 10;
    std::uint64_t seed = 42;
    bool use_star = false;
    LogisticParams logistic;
    SvmParams svm;
    ForestParams forest;
    BoostParams boost;
    bool balance_logistic = true;
    bool balance_svm = true;
    bool balance_trees = false;
    int jobs = 0;                  // 0 = all logical processors
    int exact_svd_threshold = 2000;

    void validate() const;
};

struct MetricSet {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

enum class Regime { in_corpus, inter_corpora, union_all, holdout };

const char* regime_name(Regime regime);

struct EvaluationReport {
    Regime regime = Regime::in_corpus;
    std::string train_corpus;
    std::string test_corpus;
    Variant variant = Variant::statistical;
    ClassifierKind classifier = ClassifierKind::logistic;
    int rank = 0;               // rank actually used
    std::uint64_t seed = 42;
    std::vector<MetricSet> per_fold;
    MetricSet mean;
};

MetricSet compute_metrics(const std::vector<int>& predicted,
                          const std::vector<int>& actual);

/// 10-fold protocol: per fold the space, vocabulary and weighting parameters
/// come from the training folds only. One report per effective rank.
std::vector<EvaluationReport> run_in_corpus(const Corpus& corpus,
                                            const ExperimentConfig& config);

/// Full train corpus induces the space; every test document is folded in.
/// One report per effective rank.
std::vector<EvaluationReport> run_inter_corpora_sweep(
    const Corpus& train, const Corpus& test, const ExperimentConfig& config);

/// Best-F1 rank of the inter-corpora sweep (ties to the smaller rank).
EvaluationReport run_inter_corpora(const Corpus& train, const Corpus& test,
                                   const ExperimentConfig& config);

/// Concatenated 10-fold: training folds of every corpus train one model per
/// fold, tested per source corpus. One report per corpus per effective rank.
/// Star ratings are disabled in this regime.
std::vector<EvaluationReport> run_union_sweep(const std::vector<Corpus>& corpora,
                                              const ExperimentConfig& config);

/// Best-F1 rank per corpus.
std::vector<EvaluationReport> run_union(const std::vector<Corpus>& corpora,
                                        const ExperimentConfig& config);

struct SweepResult {
    int best_rank = 0;
    std::vector<EvaluationReport> reports;
};

SweepResult sweep_and_select(const Corpus& corpus,
                             const ExperimentConfig& config);

/// One row per fold per grid cell:
/// regime,corpus_train,corpus_test,variant,classifier,rank,fold,accuracy,...
void write_sweep_csv(std::ostream& out,
                     const std::vector<EvaluationReport>& reports);

void write_summary_text(std::ostream& out,
                        const std::vector<EvaluationReport>& reports);

void write_summary_json(std::ostream& out,
                        const std::vector<EvaluationReport>& reports);

/// Exposed for prediction on trained pipelines: trains the configured
/// classifier on already-mapped document vectors. rank_for_gamma is the LSA
/// rank (star column excluded).
ClassifierModel train_classifier(const ExperimentConfig& config,
                                 const std::vector<DocumentVector>& vectors,
                                 const std::vector<int>& labels,
                                 int rank_for_gamma, std::uint64_t seed);

}  // namespace sarclab

#endif
