#include "sarclab/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sarclab/errors.hpp"
#include "sarclab/rng.hpp"
#include "parallel.hpp"

namespace sarclab {

const char* classifier_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::svm: return "svm";
        case ClassifierKind::logistic: return "logistic";
        case ClassifierKind::random_forest: return "random_forest";
        case ClassifierKind::gradient_boosting: return "gradient_boosting";
    }
    return "?";
}

ClassifierKind classifier_from_name(const std::string& name) {
    if (name == "svm") return ClassifierKind::svm;
    if (name == "logistic") return ClassifierKind::logistic;
    if (name == "random_forest") return ClassifierKind::random_forest;
    if (name == "gradient_boosting") return ClassifierKind::gradient_boosting;
    throw ValidationError("unknown classifier '" + name + "'");
}

const char* regime_name(Regime regime) {
    switch (regime) {
        case Regime::in_corpus: return "in_corpus";
        case Regime::inter_corpora: return "inter_corpora";
        case Regime::union_all: return "union";
        case Regime::holdout: return "holdout";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (rank_grid.empty())
        throw ValidationError("rank_grid must not be empty");
    for (std::size_t i = 0; i < rank_grid.size(); ++i) {
        if (rank_grid[i] < 1)
            throw ValidationError("rank_grid entries must be positive");
        if (i > 0 && rank_grid[i] <= rank_grid[i - 1])
            throw ValidationError("rank_grid must be strictly increasing");
    }
    if (k_folds < 2) throw ValidationError("k_folds must be >= 2");
    if (logistic.C <= 0.0 || svm.C <= 0.0)
        throw ValidationError("classifier C values must be positive");
    if (forest.n_trees < 1) throw ValidationError("forest needs >= 1 tree");
    if (boost.n_trees < 0 || boost.learning_rate <= 0.0)
        throw ValidationError("invalid boosting parameters");
}

MetricSet compute_metrics(const std::vector<int>& predicted,
                          const std::vector<int>& actual) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw ValidationError("compute_metrics: size mismatch or empty input");
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == 1) {
            (actual[i] == 1 ? tp : fp) += 1;
        } else {
            (actual[i] == 1 ? fn : tn) += 1;
        }
    }
    MetricSet m;
    m.accuracy = (tp + tn) / static_cast<double>(predicted.size());
    m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

ClassifierModel train_classifier(const ExperimentConfig& config,
                                 const std::vector<DocumentVector>& vectors,
                                 const std::vector<int>& labels,
                                 int rank_for_gamma, std::uint64_t seed) {
    switch (config.classifier) {
        case ClassifierKind::logistic: {
            const auto data =
                make_training_set(vectors, labels, config.balance_logistic);
            return train_logistic(data, config.logistic.penalty,
                                  config.logistic.C);
        }
        case ClassifierKind::svm: {
            const auto data =
                make_training_set(vectors, labels, config.balance_svm);
            const double gamma = config.svm.gamma > 0.0
                                     ? config.svm.gamma
                                     : 1.0 / static_cast<double>(rank_for_gamma);
            return train_svm(data, config.svm.C, gamma);
        }
        case ClassifierKind::random_forest: {
            const auto data =
                make_training_set(vectors, labels, config.balance_trees);
            ForestOptions opts;
            opts.n_trees = config.forest.n_trees;
            opts.max_depth = config.forest.max_depth;
            return train_random_forest(data, opts, seed);
        }
        case ClassifierKind::gradient_boosting: {
            const auto data =
                make_training_set(vectors, labels, config.balance_trees);
            BoostOptions opts;
            opts.n_trees = config.boost.n_trees;
            opts.learning_rate = config.boost.learning_rate;
            opts.max_depth = config.boost.max_depth;
            return train_gradient_boosting(data, opts);
        }
    }
    throw ValidationError("unknown classifier kind");
}

namespace {

DocumentVector with_star(const DocumentVector& vec, const Document& doc) {
    if (!doc.star_rating)
        throw ValidationError("document '" + doc.id +
                              "' has no star rating but use_star is set");
    return append_star(vec, *doc.star_rating);
}

// One induced space fitted on a training split, with a classifier per grid
// rank. Grid entries above the available rank clamp down.
class SplitPipeline {
public:
    SplitPipeline(const std::vector<const Document*>& train_docs,
                  const ExperimentConfig& config, bool use_star,
                  std::uint64_t stream)
        : use_star_(use_star) {
        Corpus train;
        train.name = "train";
        train.documents.reserve(train_docs.size());
        for (const Document* d : train_docs) train.documents.push_back(*d);

        const Vocabulary vocab = build_vocabulary(train.documents);
        const TermDocumentMatrix tdm = build_term_document_matrix(train, vocab);

        SvdOptions svd_opts;
        svd_opts.exact_threshold = config.exact_svd_threshold;
        svd_opts.seed = derive_seed(config.seed, stream * 4 + 1);
        InduceResult induced = induce_from_matrix(
            tdm, config.variant, config.rank_grid.back(), svd_opts);
        space_ = std::move(induced.space);

        std::vector<int> labels;
        labels.reserve(train_docs.size());
        for (const Document* d : train_docs) labels.push_back(d->label);

        used_ranks_.reserve(config.rank_grid.size());
        models_.reserve(config.rank_grid.size());
        for (std::size_t g = 0; g < config.rank_grid.size(); ++g) {
            const int r = std::min(config.rank_grid[g], space_.rank);
            used_ranks_.push_back(r);

            std::vector<DocumentVector> vecs;
            vecs.reserve(induced.training_vectors.size());
            for (std::size_t i = 0; i < induced.training_vectors.size(); ++i) {
                DocumentVector v{induced.training_vectors[i].values.head(r),
                                 induced.training_vectors[i].zero_flagged};
                vecs.push_back(use_star_ ? with_star(v, *train_docs[i])
                                         : std::move(v));
            }
            models_.push_back(train_classifier(
                config, vecs, labels, r,
                derive_seed(config.seed,
                            stream * 4 + 2 +
                                (static_cast<std::uint64_t>(r) << 32))));
        }
    }

    int used_rank(std::size_t grid_idx) const { return used_ranks_[grid_idx]; }

    // predictions for every grid entry; documents are folded in once
    std::vector<std::vector<int>> predict_all(
        const std::vector<const Document*>& docs) const {
        std::vector<DocumentVector> folded;
        folded.reserve(docs.size());
        for (const Document* d : docs) folded.push_back(fold_in(space_, *d));

        std::vector<std::vector<int>> out(used_ranks_.size());
        for (std::size_t g = 0; g < used_ranks_.size(); ++g) {
            const int r = used_ranks_[g];
            out[g].reserve(docs.size());
            for (std::size_t i = 0; i < docs.size(); ++i) {
                DocumentVector v{folded[i].values.head(r),
                                 folded[i].zero_flagged};
                if (use_star_) v = with_star(v, *docs[i]);
                out[g].push_back(predict(models_[g], v.values).label);
            }
        }
        return out;
    }

private:
    bool use_star_;
    SemanticSpace space_;
    std::vector<int> used_ranks_;
    std::vector<ClassifierModel> models_;
};

std::vector<int> labels_of(const std::vector<const Document*>& docs) {
    std::vector<int> labels;
    labels.reserve(docs.size());
    for (const Document* d : docs) labels.push_back(d->label);
    return labels;
}

MetricSet mean_of(const std::vector<MetricSet>& sets) {
    MetricSet mean;
    for (const auto& m : sets) {
        mean.accuracy += m.accuracy;
        mean.precision += m.precision;
        mean.recall += m.recall;
        mean.f1 += m.f1;
    }
    const auto n = static_cast<double>(sets.size());
    mean.accuracy /= n;
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    return mean;
}

EvaluationReport make_report(const ExperimentConfig& config, Regime regime,
                             std::string train_name, std::string test_name,
                             int rank, std::vector<MetricSet> per_fold) {
    EvaluationReport rep;
    rep.regime = regime;
    rep.train_corpus = std::move(train_name);
    rep.test_corpus = std::move(test_name);
    rep.variant = config.variant;
    rep.classifier = config.classifier;
    rep.rank = rank;
    rep.seed = config.seed;
    rep.mean = mean_of(per_fold);
    rep.per_fold = std::move(per_fold);
    return rep;
}

const EvaluationReport& best_by_f1(const std::vector<EvaluationReport>& reports) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].mean.f1 > reports[best].mean.f1) best = i;
    return reports[best];   // ties keep the earlier (smaller) rank
}

}  // namespace

std::vector<EvaluationReport> run_in_corpus(const Corpus& corpus,
                                            const ExperimentConfig& config) {
    config.validate();
    const FoldAssignment folds =
        stratified_kfold(corpus, config.k_folds, config.seed);
    const std::size_t n_grid = config.rank_grid.size();
    const auto k = static_cast<std::size_t>(config.k_folds);

    // metrics[fold][grid], used rank per fold per grid
    std::vector<std::vector<MetricSet>> metrics(k,
                                                std::vector<MetricSet>(n_grid));
    std::vector<std::vector<int>> used(k, std::vector<int>(n_grid, 0));

    parallel_for(k, config.jobs, [&](std::size_t f) {
        std::vector<const Document*> train_docs, test_docs;
        for (const auto& doc : corpus.documents) {
            (folds.fold_of(doc.id) == static_cast<int>(f) ? test_docs
                                                          : train_docs)
                .push_back(&doc);
        }
        const SplitPipeline pipeline(train_docs, config, config.use_star, f + 1);
        const auto predictions = pipeline.predict_all(test_docs);
        const auto actual = labels_of(test_docs);
        for (std::size_t g = 0; g < n_grid; ++g) {
            metrics[f][g] = compute_metrics(predictions[g], actual);
            used[f][g] = pipeline.used_rank(g);
        }
    });

    std::vector<EvaluationReport> reports;
    reports.reserve(n_grid);
    for (std::size_t g = 0; g < n_grid; ++g) {
        std::vector<MetricSet> per_fold;
        per_fold.reserve(k);
        int rank = used[0][g];
        for (std::size_t f = 0; f < k; ++f) {
            per_fold.push_back(metrics[f][g]);
            rank = std::min(rank, used[f][g]);
        }
        reports.push_back(make_report(config, Regime::in_corpus, corpus.name,
                                      corpus.name, rank, std::move(per_fold)));
    }
    return reports;
}

std::vector<EvaluationReport> run_inter_corpora_sweep(
    const Corpus& train, const Corpus& test, const ExperimentConfig& config) {
    config.validate();
    if (train.documents.empty() || test.documents.empty())
        throw ValidationError("inter-corpora run needs non-empty corpora");

    const bool star = config.use_star && train.has_star_ratings() &&
                      test.has_star_ratings();

    std::vector<const Document*> train_docs, test_docs;
    for (const auto& d : train.documents) train_docs.push_back(&d);
    for (const auto& d : test.documents) test_docs.push_back(&d);

    const SplitPipeline pipeline(train_docs, config, star, 0);
    const auto predictions = pipeline.predict_all(test_docs);
    const auto actual = labels_of(test_docs);

    std::vector<EvaluationReport> reports;
    reports.reserve(config.rank_grid.size());
    for (std::size_t g = 0; g < config.rank_grid.size(); ++g) {
        reports.push_back(make_report(
            config, Regime::inter_corpora, train.name, test.name,
            pipeline.used_rank(g), {compute_metrics(predictions[g], actual)}));
    }
    return reports;
}

EvaluationReport run_inter_corpora(const Corpus& train, const Corpus& test,
                                   const ExperimentConfig& config) {
    return best_by_f1(run_inter_corpora_sweep(train, test, config));
}

std::vector<EvaluationReport> run_union_sweep(const std::vector<Corpus>& corpora,
                                              const ExperimentConfig& config) {
    config.validate();
    const FoldAssignment folds = union_folds(corpora, config.k_folds, config.seed);
    const std::size_t n_grid = config.rank_grid.size();
    const auto k = static_cast<std::size_t>(config.k_folds);
    const std::size_t n_corpora = corpora.size();

    // metrics[fold][corpus][grid]
    std::vector<std::vector<std::vector<MetricSet>>> metrics(
        k, std::vector<std::vector<MetricSet>>(n_corpora,
                                               std::vector<MetricSet>(n_grid)));
    std::vector<std::vector<int>> used(k, std::vector<int>(n_grid, 0));

    parallel_for(k, config.jobs, [&](std::size_t f) {
        std::vector<const Document*> train_docs;
        std::vector<std::vector<const Document*>> test_docs(n_corpora);
        for (std::size_t c = 0; c < n_corpora; ++c) {
            for (const auto& doc : corpora[c].documents) {
                (folds.fold_of(doc.id) == static_cast<int>(f) ? test_docs[c]
                                                              : train_docs)
                    .push_back(&doc);
            }
        }
        // star ratings are not uniformly available across corpora
        const SplitPipeline pipeline(train_docs, config, false, f + 1);
        for (std::size_t g = 0; g < n_grid; ++g)
            used[f][g] = pipeline.used_rank(g);
        for (std::size_t c = 0; c < n_corpora; ++c) {
            const auto predictions = pipeline.predict_all(test_docs[c]);
            const auto actual = labels_of(test_docs[c]);
            for (std::size_t g = 0; g < n_grid; ++g)
                metrics[f][c][g] = compute_metrics(predictions[g], actual);
        }
    });

    std::vector<EvaluationReport> reports;
    reports.reserve(n_corpora * n_grid);
    for (std::size_t c = 0; c < n_corpora; ++c) {
        for (std::size_t g = 0; g < n_grid; ++g) {
            std::vector<MetricSet> per_fold;
            per_fold.reserve(k);
            int rank = used[0][g];
            for (std::size_t f = 0; f < k; ++f) {
                per_fold.push_back(metrics[f][c][g]);
                rank = std::min(rank, used[f][g]);
            }
            reports.push_back(make_report(config, Regime::union_all, "union",
                                          corpora[c].name, rank,
                                          std::move(per_fold)));
        }
    }
    return reports;
}

std::vector<EvaluationReport> run_union(const std::vector<Corpus>& corpora,
                                        const ExperimentConfig& config) {
    const auto sweep = run_union_sweep(corpora, config);
    const std::size_t n_grid = config.rank_grid.size();
    std::vector<EvaluationReport> best;
    best.reserve(corpora.size());
    for (std::size_t c = 0; c < corpora.size(); ++c) {
        const std::vector<EvaluationReport> slice(
            sweep.begin() + static_cast<std::ptrdiff_t>(c * n_grid),
            sweep.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_grid));
        best.push_back(best_by_f1(slice));
    }
    return best;
}

SweepResult sweep_and_select(const Corpus& corpus,
                             const ExperimentConfig& config) {
    SweepResult result;
    result.reports = run_in_corpus(corpus, config);
    result.best_rank = best_by_f1(result.reports).rank;
    return result;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& out,
                     const std::vector<EvaluationReport>& reports) {
    out << "regime,corpus_train,corpus_test,variant,classifier,rank,fold,"
           "accuracy,precision,recall,f1\n";
    for (const auto& rep : reports) {
        for (std::size_t f = 0; f < rep.per_fold.size(); ++f) {
            const auto& m = rep.per_fold[f];
            out << regime_name(rep.regime) << ',' << rep.train_corpus << ','
                << rep.test_corpus << ',' << variant_name(rep.variant) << ','
                << classifier_name(rep.classifier) << ',' << rep.rank << ','
                << f << ',' << fmt_double(m.accuracy) << ','
                << fmt_double(m.precision) << ',' << fmt_double(m.recall) << ','
                << fmt_double(m.f1) << '\n';
        }
    }
}

void write_summary_text(std::ostream& out,
                        const std::vector<EvaluationReport>& reports) {
    char line[256];
    std::snprintf(line, sizeof line, "%-13s %-24s %-12s %-18s %5s %6s %6s %6s %6s",
                  "regime", "train>test", "variant", "classifier", "rank", "F1",
                  "prec", "rec", "acc");
    out << line << '\n';
    for (const auto& rep : reports) {
        const std::string pair = rep.train_corpus + ">" + rep.test_corpus;
        std::snprintf(line, sizeof line,
                      "%-13s %-24s %-12s %-18s %5d %6.1f %6.1f %6.1f %6.1f",
                      regime_name(rep.regime), pair.c_str(),
                      variant_name(rep.variant), classifier_name(rep.classifier),
                      rep.rank, 100.0 * rep.mean.f1, 100.0 * rep.mean.precision,
                      100.0 * rep.mean.recall, 100.0 * rep.mean.accuracy);
        out << line << '\n';
    }
}

void write_summary_json(std::ostream& out,
                        const std::vector<EvaluationReport>& reports) {
    nlohmann::json root = nlohmann::json::array();
    for (const auto& rep : reports) {
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& m : rep.per_fold)
            folds.push_back({{"accuracy", m.accuracy},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1}});
        root.push_back({{"regime", regime_name(rep.regime)},
                        {"train_corpus", rep.train_corpus},
                        {"test_corpus", rep.test_corpus},
                        {"variant", variant_name(rep.variant)},
                        {"classifier", classifier_name(rep.classifier)},
                        {"rank", rep.rank},
                        {"seed", rep.seed},
                        {"mean",
                         {{"accuracy", rep.mean.accuracy},
                          {"precision", rep.mean.precision},
                          {"recall", rep.mean.recall},
                          {"f1", rep.mean.f1}}},
                        {"per_fold", folds}});
    }
    out << root.dump(2) << '\n';
}

}  // namespace sarclab
