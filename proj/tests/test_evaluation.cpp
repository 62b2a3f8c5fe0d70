#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "sarclab/errors.hpp"
#include "sarclab/evaluation.hpp"
#include "test_util.hpp"

using namespace sarclab;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.variant = Variant::statistical;
    config.classifier = ClassifierKind::logistic;
    config.rank_grid = {10};
    config.k_folds = 10;
    config.seed = 42;
    config.jobs = 2;
    return config;
}

bool metrics_equal(const MetricSet& a, const MetricSet& b) {
    return a.accuracy == b.accuracy && a.precision == b.precision &&
           a.recall == b.recall && a.f1 == b.f1;
}

}  // namespace

TEST_CASE("compute_metrics on hand-checked confusion matrices") {
    // perfect prediction
    const MetricSet perfect = compute_metrics({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    // tp=2 fp=1 fn=1 tn=6
    const std::vector<int> predicted = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    const std::vector<int> actual = {1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
    const MetricSet m = compute_metrics(predicted, actual);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.accuracy == doctest::Approx(0.8));

    // all-negative predictions with positives present
    const MetricSet zero = compute_metrics({0, 0, 0}, {1, 0, 1});
    CHECK(zero.precision == 0.0);
    CHECK(zero.recall == 0.0);
    CHECK(zero.f1 == 0.0);

    CHECK_THROWS_AS(compute_metrics({1}, {1, 0}), ValidationError);
    CHECK_THROWS_AS(compute_metrics({}, {}), ValidationError);
}

TEST_CASE("compute_metrics matches a brute-force confusion enumeration") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        std::vector<int> predicted(n), actual(n);
        for (std::size_t i = 0; i < n; ++i) {
            predicted[i] = static_cast<int>(rng() % 2);
            actual[i] = static_cast<int>(rng() % 2);
        }
        double tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (predicted[i] == 1 && actual[i] == 1) tp += 1;
            if (predicted[i] == 1 && actual[i] == 0) fp += 1;
            if (predicted[i] == 0 && actual[i] == 1) fn += 1;
            if (predicted[i] == 0 && actual[i] == 0) tn += 1;
        }
        const MetricSet m = compute_metrics(predicted, actual);
        CHECK(m.accuracy == doctest::Approx((tp + tn) / static_cast<double>(n)));
        CHECK(m.precision ==
              doctest::Approx(tp + fp > 0 ? tp / (tp + fp) : 0.0));
        CHECK(m.recall == doctest::Approx(tp + fn > 0 ? tp / (tp + fn) : 0.0));
        const double f1 = m.precision + m.recall > 0
                              ? 2 * m.precision * m.recall /
                                    (m.precision + m.recall)
                              : 0.0;
        CHECK(m.f1 == doctest::Approx(f1));
    }
}

TEST_CASE("in-corpus run on a separable corpus reaches high F1") {
    const Corpus corpus = test_util::separable_corpus(100, 1001);
    const auto reports = run_in_corpus(corpus, small_config());
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].per_fold.size() == 10);
    CHECK(reports[0].mean.f1 >= 0.95);
    CHECK(reports[0].rank == 10);
    CHECK(reports[0].train_corpus == "separable");

    // mean is the arithmetic mean of the per-fold values
    double sum = 0.0;
    for (const auto& m : reports[0].per_fold) sum += m.f1;
    CHECK(reports[0].mean.f1 == doctest::Approx(sum / 10.0).epsilon(1e-12));
}

TEST_CASE("in-corpus run on shuffled labels stays near chance") {
    Corpus corpus = test_util::separable_corpus(100, 1002, "shuffled");
    std::vector<int> labels;
    for (const auto& d : corpus.documents) labels.push_back(d.label);
    std::mt19937_64 rng(55);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < labels.size(); ++i)
        corpus.documents[i].label = labels[i];

    const auto reports = run_in_corpus(corpus, small_config());
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].mean.accuracy >= 0.40);
    CHECK(reports[0].mean.accuracy <= 0.60);
}

TEST_CASE("in-corpus runs are deterministic") {
    const Corpus corpus = test_util::separable_corpus(40, 1003);
    ExperimentConfig config = small_config();
    config.rank_grid = {5, 10};
    config.k_folds = 4;

    const auto a = run_in_corpus(corpus, config);
    const auto b = run_in_corpus(corpus, config);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].per_fold.size() == b[i].per_fold.size());
        for (std::size_t f = 0; f < a[i].per_fold.size(); ++f)
            CHECK(metrics_equal(a[i].per_fold[f], b[i].per_fold[f]));
    }
}

TEST_CASE("training-fold induction ignores test-fold content") {
    Corpus corpus = test_util::separable_corpus(20, 1004);
    const FoldAssignment folds = stratified_kfold(corpus, 4, 42);

    auto induce_on_training_folds = [&](const Corpus& c) {
        std::vector<Document> train_docs;
        for (const auto& doc : c.documents)
            if (folds.fold_of(doc.id) != 0) train_docs.push_back(doc);
        Corpus train;
        train.name = "train";
        train.documents = train_docs;
        const Vocabulary vocab = build_vocabulary(train.documents);
        SvdOptions opts;
        opts.seed = 7;
        return induce_from_matrix(build_term_document_matrix(train, vocab),
                                  Variant::statistical, 8, opts);
    };

    const InduceResult before = induce_on_training_folds(corpus);
    for (auto& doc : corpus.documents)
        if (folds.fold_of(doc.id) == 0) doc.text = "mutated garbage !!";
    const InduceResult after = induce_on_training_folds(corpus);

    REQUIRE(before.space.rank == after.space.rank);
    CHECK(std::memcmp(before.space.U_r.data(), after.space.U_r.data(),
                      sizeof(double) *
                          static_cast<std::size_t>(before.space.U_r.size())) == 0);
    CHECK(std::memcmp(before.space.sigma_r.data(), after.space.sigma_r.data(),
                      sizeof(double) * static_cast<std::size_t>(
                                           before.space.sigma_r.size())) == 0);
}

TEST_CASE("inter-corpora self-transfer bounds the in-corpus mean") {
    const Corpus corpus = test_util::separable_corpus(50, 1005);
    ExperimentConfig config = small_config();
    config.rank_grid = {8};

    const EvaluationReport self = run_inter_corpora(corpus, corpus, config);
    const auto in_corpus = run_in_corpus(corpus, config);
    CHECK(self.per_fold.size() == 1);
    CHECK(self.mean.f1 >= in_corpus[0].mean.f1 - 1e-12);
}

TEST_CASE("inter-corpora with disjoint vocabulary zero-flags every vector") {
    // test corpus shares no tokens with the training corpus; the majority
    // class of the test set is 1, matching the tie rule at the zero vector
    const Corpus train = test_util::separable_corpus(30, 1006, "train");
    Corpus test;
    test.name = "test";
    for (int i = 0; i < 30; ++i)
        test.documents.push_back({"test-" + std::to_string(i),
                                  "qq" + std::to_string(i % 7) + " zz",
                                  i < 20 ? 1 : 0, std::nullopt, "test"});

    ExperimentConfig config = small_config();
    config.rank_grid = {5};
    const EvaluationReport report = run_inter_corpora(train, test, config);

    // all predictions collapse to a single class; accuracy equals that
    // class's share of the test set
    const double rate1 = 20.0 / 30.0;
    const double rate0 = 10.0 / 30.0;
    const bool matches_single_class =
        report.mean.accuracy == doctest::Approx(rate1) ||
        report.mean.accuracy == doctest::Approx(rate0);
    CHECK(matches_single_class);
    CHECK(report.mean.accuracy == doctest::Approx(rate1));   // tie rule
}

TEST_CASE("inter-corpora sweep produces a report per rank") {
    const Corpus a = test_util::separable_corpus(30, 1007, "a");
    const Corpus b = test_util::separable_corpus(30, 1008, "b");
    ExperimentConfig config = small_config();
    config.rank_grid = {4, 8};
    const auto sweep = run_inter_corpora_sweep(a, b, config);
    CHECK(sweep.size() == 2);
    CHECK(sweep[0].rank == 4);
    CHECK(sweep[1].rank == 8);
    CHECK(sweep[0].regime == Regime::inter_corpora);
}

TEST_CASE("union over one corpus equals the in-corpus run") {
    const Corpus corpus = test_util::separable_corpus(40, 1009);
    ExperimentConfig config = small_config();
    config.rank_grid = {6};
    config.k_folds = 5;

    const auto union_reports = run_union_sweep({corpus}, config);
    const auto in_reports = run_in_corpus(corpus, config);
    REQUIRE(union_reports.size() == 1);
    REQUIRE(in_reports.size() == 1);
    REQUIRE(union_reports[0].per_fold.size() == in_reports[0].per_fold.size());
    for (std::size_t f = 0; f < union_reports[0].per_fold.size(); ++f)
        CHECK(metrics_equal(union_reports[0].per_fold[f],
                            in_reports[0].per_fold[f]));
}

TEST_CASE("union of identical twin corpora is symmetric") {
    const Corpus a = test_util::separable_corpus(30, 1010, "twin_a");
    const Corpus b = test_util::separable_corpus(30, 1010, "twin_b");
    ExperimentConfig config = small_config();
    config.rank_grid = {6};
    config.k_folds = 5;

    const auto reports = run_union(std::vector<Corpus>{a, b}, config);
    REQUIRE(reports.size() == 2);
    CHECK(std::abs(reports[0].mean.f1 - reports[1].mean.f1) <= 1e-12);
    CHECK(std::abs(reports[0].mean.accuracy - reports[1].mean.accuracy) <=
          1e-12);
    CHECK(reports[0].test_corpus == "twin_a");
    CHECK(reports[1].test_corpus == "twin_b");
    CHECK(reports[0].train_corpus == "union");
}

TEST_CASE("sweep_and_select picks the best rank with ties toward smaller") {
    const Corpus corpus = test_util::separable_corpus(40, 1011);
    ExperimentConfig config = small_config();
    config.k_folds = 4;

    config.rank_grid = {20};
    CHECK(sweep_and_select(corpus, config).best_rank == 20);

    // fully separable at every rank: ties resolve to the smallest grid point
    config.rank_grid = {5, 10, 20, 40};
    const SweepResult result = sweep_and_select(corpus, config);
    CHECK(result.best_rank <= 10);
    CHECK(result.reports.size() == 4);
}

TEST_CASE("config validation rejects malformed grids") {
    ExperimentConfig config = small_config();
    config.rank_grid = {};
    CHECK_THROWS_AS(config.validate(), ValidationError);
    config.rank_grid = {10, 10};
    CHECK_THROWS_AS(config.validate(), ValidationError);
    config.rank_grid = {10, 5};
    CHECK_THROWS_AS(config.validate(), ValidationError);
    config.rank_grid = {5, 10};
    config.k_folds = 1;
    CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("star feature flows through the in-corpus pipeline") {
    // stars correlate perfectly with the label; text is pure noise
    Corpus corpus = test_util::noise_corpus(40, 1012, "starred");
    for (auto& doc : corpus.documents)
        doc.star_rating = doc.label == 1 ? 5 : 1;

    ExperimentConfig config = small_config();
    config.rank_grid = {5};
    config.k_folds = 5;
    config.use_star = true;
    const auto with_star = run_in_corpus(corpus, config);
    CHECK(with_star[0].mean.f1 >= 0.95);

    config.use_star = false;
    const auto without = run_in_corpus(corpus, config);
    CHECK(without[0].mean.f1 <= with_star[0].mean.f1);
}

TEST_CASE("csv emission shape and precision") {
    const Corpus corpus = test_util::separable_corpus(30, 1013);
    ExperimentConfig config = small_config();
    config.rank_grid = {4, 8};
    config.k_folds = 3;
    const auto reports = run_in_corpus(corpus, config);

    std::ostringstream csv;
    write_sweep_csv(csv, reports);
    std::istringstream lines(csv.str());
    std::string line;
    std::size_t count = 0;
    std::getline(lines, line);
    CHECK(line ==
          "regime,corpus_train,corpus_test,variant,classifier,rank,fold,"
          "accuracy,precision,recall,f1");
    while (std::getline(lines, line)) ++count;
    CHECK(count == 6);   // |grid| * k

    std::ostringstream text, json;
    write_summary_text(text, reports);
    write_summary_json(json, reports);
    CHECK(text.str().find("in_corpus") != std::string::npos);
    CHECK(json.str().find("\"per_fold\"") != std::string::npos);
}
