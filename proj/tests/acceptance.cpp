// Acceptance checks. Each criterion prints one PASS/FAIL line (SKIP for
// dataset-conditional checks without data, REPORT for tolerance deviations
// that are informational by design). Exit status is non-zero iff any
// criterion FAILs.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sarclab/classifiers.hpp"
#include "sarclab/corpus.hpp"
#include "sarclab/evaluation.hpp"
#include "sarclab/linalg.hpp"
#include "sarclab/semantic_space.hpp"

using namespace sarclab;

namespace {

struct Outcome {
    std::string status;   // PASS | FAIL | SKIP | REPORT
    std::string detail;
};

int failures = 0;

void run_criterion(const std::string& name, double time_limit_s,
                   const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = body();
    } catch (const std::exception& e) {
        outcome = {"FAIL", std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (outcome.status == "PASS" && time_limit_s > 0.0 &&
        elapsed > time_limit_s) {
        outcome.status = "FAIL";
        outcome.detail += " [exceeded time limit]";
    }
    if (outcome.status == "FAIL") ++failures;

    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", elapsed);
    std::cout << outcome.status << "  " << name << "  (" << outcome.detail
              << ", " << timing << ")\n";
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
    return m;
}

Corpus synthetic_corpus(int n_per_class, std::uint64_t seed, bool separable,
                        const std::string& name) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> word(0, 19);
    std::uniform_int_distribution<int> len(5, 12);
    Corpus corpus;
    corpus.name = name;
    int id = 0;
    for (int label = 0; label <= 1; ++label) {
        for (int i = 0; i < n_per_class; ++i) {
            const std::string stem =
                separable ? (label == 0 ? "calm" : "wild") : "word";
            std::string text;
            const int n_words = len(rng);
            for (int w = 0; w < n_words; ++w) {
                if (w > 0) text += ' ';
                text += stem + std::to_string(word(rng));
            }
            corpus.documents.push_back({name + "-" + std::to_string(id++), text,
                                        label, std::nullopt, name});
        }
    }
    return corpus;
}

// --------------------------------------------------------------- criteria

Outcome eckart_young_suite() {
    std::mt19937_64 rng(20260811);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix m = random_matrix(20, 30, rng);
        const SvdFactors f = svd(m);
        for (int r = 1; r <= f.rank(); ++r) {
            const Matrix m_r = truncate(f, r).reconstruct();
            const double resid = frobenius_distance(m, m_r);
            double tail = 0.0;
            for (int i = r; i < f.rank(); ++i) tail += f.sigma(i) * f.sigma(i);
            const double expected = std::sqrt(tail);
            const double err = std::abs(resid - expected);
            if (expected > 1e-9 * m.norm())
                worst_rel = std::max(worst_rel, err / expected);
            if (err > 1e-6 * expected + 1e-9 * m.norm())
                return {"FAIL", "Eckart-Young identity violated at r=" +
                                    std::to_string(r)};

            for (int c = 0; c < 100; ++c) {
                const Matrix competitor =
                    random_matrix(20, r, rng) * random_matrix(r, 30, rng);
                if (resid > frobenius_distance(m, competitor) + 1e-12)
                    return {"FAIL", "random rank-" + std::to_string(r) +
                                        " competitor beat the truncation"};
            }
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max relative error %.2e", worst_rel);
    return {"PASS", std::string("50 matrices, all ranks; ") + buf};
}

Outcome estimator_suite() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> count(0, 9);
    int bound_holds = 0;
    int normalized_holds = 0;
    double max_ratio = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(10, 8);
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = count(rng);
        if (a.sum() == 0.0) a(0, 0) = 1.0;

        const Matrix q = a / a.sum();
        const Matrix psi_q = q.array().sqrt();
        const SvdFactors f = svd(psi_q);
        const int r = 1 + static_cast<int>(
                              rng() % static_cast<std::uint64_t>(
                                          std::max(1, f.rank() - 1)));
        const Matrix xi = truncate(f, r).reconstruct();

        const Matrix amplitude = probability_amplitude(xi);
        const double unit = amplitude.array().square().sum();
        if (std::abs(unit - 1.0) > 1e-12)
            return {"FAIL", "amplitude square-sum off by " +
                                std::to_string(unit - 1.0)};

        const Matrix distribution = probability_distribution(amplitude);
        if (std::abs(distribution.sum() - 1.0) > 1e-10)
            return {"FAIL", "composed distribution sum off by " +
                                std::to_string(distribution.sum() - 1.0)};

        const double frob = frobenius_distance(xi, psi_q);
        const double hell = hellinger_distance(distribution, q);
        if (hell <= frob + 1e-12) ++bound_holds;
        if (hell <= std::sqrt(2.0) * frob + 1e-12) ++normalized_holds;
        if (frob > 0.0) max_ratio = std::max(max_ratio, hell / frob);
    }
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "unit sums hold; d_H<=d_F on %d/20 instances, max d_H/d_F "
                  "%.4f; with the 1/sqrt(2)-normalized Hellinger the bound "
                  "holds on %d/20",
                  bound_holds, max_ratio, normalized_holds);
    // the unnormalized inequality is asserted as specified; see the
    // diagnostic for the normalized form that does hold
    return {bound_holds == 20 ? "PASS" : "FAIL", buf};
}

Outcome fold_in_exactness() {
    // 30 documents over a 60-word pool: full-rank matrices in both variants
    std::mt19937_64 rng(4021);
    std::uniform_int_distribution<int> word(0, 59);
    std::uniform_int_distribution<int> len(8, 16);
    Corpus corpus;
    corpus.name = "foldin";
    for (int i = 0; i < 30; ++i) {
        std::string text;
        const int n_words = len(rng);
        for (int w = 0; w < n_words; ++w) {
            if (w > 0) text += ' ';
            text += "tok" + std::to_string(word(rng));
        }
        corpus.documents.push_back(
            {"d" + std::to_string(i), text, i % 2, std::nullopt, "foldin"});
    }

    for (const Variant variant : {Variant::traditional, Variant::statistical}) {
        const InduceResult result = induce_space(corpus, variant, 30);
        if (result.space.rank != 30)
            return {"FAIL", std::string(variant_name(variant)) +
                                " space is rank-deficient: " +
                                std::to_string(result.space.rank)};
        for (std::size_t j = 0; j < corpus.documents.size(); ++j) {
            const DocumentVector mapped =
                fold_in(result.space, corpus.documents[j]);
            const double err =
                (mapped.values - result.training_vectors[j].values)
                    .lpNorm<Eigen::Infinity>();
            if (err > 1e-8)
                return {"FAIL", std::string(variant_name(variant)) +
                                    " doc " + std::to_string(j) +
                                    " deviates by " + std::to_string(err)};
        }
    }
    return {"PASS", "both variants reproduce all 30 V_r rows within 1e-8"};
}

Outcome solver_suite() {
    // logistic gradient vs central finite differences
    std::mt19937_64 rng(606);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TrainingSet data;
    data.X = random_matrix(30, 4, rng);
    for (int i = 0; i < 30; ++i) data.y.push_back(static_cast<int>(rng() % 2));
    if (balanced_class_weights(data.y).first <= 0.0) return {"FAIL", "setup"};
    data.weights = Vector::Ones(30);

    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        Vector beta(5);
        for (int j = 0; j < 5; ++j) beta(j) = gauss(rng);
        const Vector analytic = logistic_gradient(data, beta, Penalty::l2, 10.0);
        Vector fd(5);
        for (int j = 0; j < 5; ++j) {
            Vector up = beta, down = beta;
            up(j) += h;
            down(j) -= h;
            fd(j) = (logistic_objective(data, up, Penalty::l2, 10.0) -
                     logistic_objective(data, down, Penalty::l2, 10.0)) /
                    (2.0 * h);
        }
        if ((analytic - fd).norm() > 1e-5 * std::max(1.0, fd.norm()))
            return {"FAIL", "gradient/finite-difference mismatch at point " +
                                std::to_string(trial)};
    }

    // svm KKT on blobs
    TrainingSet blobs;
    blobs.X.resize(120, 2);
    for (int i = 0; i < 60; ++i) {
        blobs.X(i, 0) = gauss(rng) * 0.5;
        blobs.X(i, 1) = gauss(rng) * 0.5;
        blobs.y.push_back(0);
    }
    for (int i = 60; i < 120; ++i) {
        blobs.X(i, 0) = 2.5 + gauss(rng) * 0.5;
        blobs.X(i, 1) = 2.5 + gauss(rng) * 0.5;
        blobs.y.push_back(1);
    }
    blobs.weights = Vector::Ones(120);
    const double cap = 100.0;
    const SvmModel svm = train_svm(blobs, cap, 0.5);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < blobs.X.rows(); ++i) {
        const Vector x = blobs.X.row(i).transpose();
        const double yi = blobs.y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        double alpha = 0.0;
        for (Eigen::Index k = 0; k < svm.support_vectors.rows(); ++k)
            if ((svm.support_vectors.row(k).transpose() - x).norm() == 0.0)
                alpha += std::abs(svm.dual_coefs(k));
        alpha = std::min(alpha, cap);
        const double margin = yi * svm_decision(svm, x);
        double violation = 0.0;
        if (alpha <= 1e-9) violation = std::max(0.0, 1.0 - margin);
        else if (alpha >= cap - 1e-9) violation = std::max(0.0, margin - 1.0);
        else violation = std::abs(margin - 1.0);
        worst = std::max(worst, violation);
    }
    if (worst > 1e-3)
        return {"FAIL", "KKT violation " + std::to_string(worst) + " > 1e-3"};

    // gaussian-kernel svm separates xor
    TrainingSet xor_data;
    xor_data.X.resize(4, 2);
    xor_data.X << 0, 0, 1, 1, 0, 1, 1, 0;
    xor_data.y = {0, 0, 1, 1};
    xor_data.weights = Vector::Ones(4);
    const SvmModel xor_model = train_svm(xor_data, 100.0, 1.0);
    for (Eigen::Index i = 0; i < 4; ++i)
        if (predict_svm(xor_model, xor_data.X.row(i).transpose()).label !=
            xor_data.y[static_cast<std::size_t>(i)])
            return {"FAIL", "xor training accuracy below 1.0"};

    // boosting loss is non-increasing over 100 rounds
    BoostOptions boost_opts;
    boost_opts.n_trees = 100;
    const TreeEnsembleModel boosted = train_gradient_boosting(blobs, boost_opts);
    for (std::size_t i = 1; i < boosted.loss_curve.size(); ++i)
        if (boosted.loss_curve[i] > boosted.loss_curve[i - 1] + 1e-9)
            return {"FAIL", "boosting loss increased at round " +
                                std::to_string(i)};

    return {"PASS",
            "gradient check, KKT (max violation " + std::to_string(worst) +
                "), xor, monotone boosting loss"};
}

Outcome pipeline_null_check() {
    ExperimentConfig config;
    config.variant = Variant::statistical;
    config.classifier = ClassifierKind::logistic;
    config.rank_grid = {10};
    config.k_folds = 10;
    config.seed = 42;

    Corpus shuffled = synthetic_corpus(100, 81, true, "shuffled");
    std::vector<int> labels;
    for (const auto& d : shuffled.documents) labels.push_back(d.label);
    std::mt19937_64 rng(99);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < labels.size(); ++i)
        shuffled.documents[i].label = labels[i];

    const auto null_reports = run_in_corpus(shuffled, config);
    const double null_acc = null_reports[0].mean.accuracy;
    if (null_acc < 0.40 || null_acc > 0.60)
        return {"FAIL", "shuffled-label accuracy " + std::to_string(null_acc) +
                            " outside [0.40, 0.60]"};

    const Corpus separable = synthetic_corpus(100, 82, true, "separable");
    const auto sep_reports = run_in_corpus(separable, config);
    const double f1 = sep_reports[0].mean.f1;
    if (f1 < 0.95)
        return {"FAIL", "separable-corpus F1 " + std::to_string(f1) + " < 0.95"};

    char buf[96];
    std::snprintf(buf, sizeof buf, "null accuracy %.3f, separable F1 %.3f",
                  null_acc, f1);
    return {"PASS", buf};
}

Outcome sarcasmcorpus_reproduction() {
    const char* path = std::getenv("SARCLAB_SARCASMCORPUS");
    if (!path)
        return {"SKIP",
                "set SARCLAB_SARCASMCORPUS to a jsonl/csv with text,label,star"};

    const Corpus corpus = load_corpus(path, format_from_extension(path));

    ExperimentConfig config;
    config.classifier = ClassifierKind::logistic;
    config.logistic = {Penalty::l1, 10.0};
    config.rank_grid = {10, 20, 40, 60, 80, 100};
    config.k_folds = 10;
    config.seed = 42;

    config.variant = Variant::statistical;
    config.use_star = false;
    double best_plain = 0.0;
    for (const auto& rep : run_in_corpus(corpus, config))
        best_plain = std::max(best_plain, 100.0 * rep.mean.f1);

    config.variant = Variant::traditional;
    config.use_star = true;
    double best_star = 0.0;
    for (const auto& rep : run_in_corpus(corpus, config))
        best_star = std::max(best_star, 100.0 * rep.mean.f1);

    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "S-Log.Reg.L1 F1 %.1f (ref 71.8+-3.0); star T-Log.Reg.L1 F1 "
                  "%.1f (ref 80.7+-3.0)",
                  best_plain, best_star);
    const bool within =
        std::abs(best_plain - 71.8) <= 3.0 && std::abs(best_star - 80.7) <= 3.0;
    // deviations are reported, not failed: per-fold induction differs from
    // the published setup in ways the protocol leaves open
    return {within ? "PASS" : "REPORT", buf};
}

Outcome semeval_reproduction() {
    const char* train_path = std::getenv("SARCLAB_SEMEVAL2018_TRAIN");
    const char* test_path = std::getenv("SARCLAB_SEMEVAL2018_TEST");
    if (!train_path || !test_path)
        return {"SKIP",
                "set SARCLAB_SEMEVAL2018_TRAIN and SARCLAB_SEMEVAL2018_TEST"};

    const Corpus train = load_corpus(train_path, format_from_extension(train_path),
                                     "semeval_train");
    const Corpus test = load_corpus(test_path, format_from_extension(test_path),
                                    "semeval_test");

    ExperimentConfig config;
    config.variant = Variant::statistical;
    config.classifier = ClassifierKind::random_forest;
    config.rank_grid = {20};
    config.seed = 42;

    const EvaluationReport report = run_inter_corpora(train, test, config);
    const double f1 = 100.0 * report.mean.f1;
    char buf[64];
    std::snprintf(buf, sizeof buf, "S-RF test F1 %.1f (ref 63.2+-3.0)", f1);
    return {std::abs(f1 - 63.2) <= 3.0 ? "PASS" : "FAIL", buf};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() /
        ("sarclab_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    const Corpus corpus = synthetic_corpus(30, 83, true, "det");
    std::ofstream corpus_file(dir / "c.jsonl");
    for (const auto& doc : corpus.documents)
        corpus_file << "{\"id\": \"" << doc.id << "\", \"text\": \"" << doc.text
                    << "\", \"label\": " << doc.label << "}\n";
    corpus_file.close();

    std::ofstream manifest(dir / "run.conf");
    manifest << "regime = in_corpus\nvariant = statistical\n"
             << "classifier = logistic\nrank_grid = 4 8\nk_folds = 3\n"
             << "seed = 42\n[corpora]\ndet = " << (dir / "c.jsonl").string()
             << "\n";
    manifest.close();

    auto run_once = [&](const std::string& out, int jobs) {
        const std::string cmd = std::string(SARCLAB_BIN) + " evaluate " +
                                (dir / "run.conf").string() + " --output-dir " +
                                (dir / out).string() + " --jobs " +
                                std::to_string(jobs) + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    if (!run_once("out1", 1) || !run_once("out2", 2))
        return {"FAIL", "cli evaluate returned non-zero"};

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    const std::string a = slurp(dir / "out1" / "sweep.csv");
    const std::string b = slurp(dir / "out2" / "sweep.csv");
    std::error_code ec;
    fs::remove_all(dir, ec);
    if (a.empty() || a != b)
        return {"FAIL", "sweep.csv differs between reruns"};
    return {"PASS", "byte-identical sweep.csv across reruns and job counts"};
}

}  // namespace

int main() {
    run_criterion("eckart_young_suite", 10.0, eckart_young_suite);
    run_criterion("estimator_suite", 5.0, estimator_suite);
    run_criterion("fold_in_exactness", 5.0, fold_in_exactness);
    run_criterion("solver_suite", 60.0, solver_suite);
    run_criterion("pipeline_null_check", 120.0, pipeline_null_check);
    run_criterion("sarcasmcorpus_reproduction", 1800.0, sarcasmcorpus_reproduction);
    run_criterion("semeval_reproduction", 1800.0, semeval_reproduction);
    run_criterion("determinism", 120.0, determinism);

    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all runnable criteria passed\n";
    return 0;
}
