#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "sarclab/corpus.hpp"
#include "sarclab/errors.hpp"
#include "sarclab/evaluation.hpp"
#include "sarclab/manifest.hpp"
#include "sarclab/model_io.hpp"
#include "sarclab/rng.hpp"
#include "sarclab/version.hpp"

namespace {

using namespace sarclab;

void report_skips(const LoadReport& report, const std::string& path) {
    if (report.skipped == 0) return;
    std::cerr << "warning: skipped " << report.skipped
              << " record(s) missing text or label in " << path << " (lines";
    const std::size_t shown = std::min<std::size_t>(report.skipped_lines.size(), 8);
    for (std::size_t i = 0; i < shown; ++i)
        std::cerr << ' ' << report.skipped_lines[i];
    if (report.skipped_lines.size() > shown) std::cerr << " ...";
    std::cerr << ")\n";
}

Corpus load_with_report(const std::string& path, std::optional<CorpusFormat> fmt,
                        const std::string& name) {
    LoadReport report;
    const CorpusFormat format = fmt ? *fmt : format_from_extension(path);
    Corpus corpus = load_corpus(path, format, name, &report);
    report_skips(report, path);
    return corpus;
}

std::string timestamp_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// writes all outputs under temp names and renames at the end, so a failed
// run leaves no partial files behind
class OutputStage {
public:
    explicit OutputStage(const std::filesystem::path& dir) : dir_(dir) {
        std::filesystem::create_directories(dir_);
    }

    ~OutputStage() {
        for (const auto& tmp : pending_) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
        }
    }

    void write(const std::string& filename, const std::string& content) {
        const auto tmp = dir_ / (filename + ".tmp");
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failure on " + tmp.string());
        out.close();
        pending_.push_back(tmp);
        names_.push_back(filename);
    }

    void commit() {
        for (std::size_t i = 0; i < pending_.size(); ++i)
            std::filesystem::rename(pending_[i], dir_ / names_[i]);
        pending_.clear();
        names_.clear();
    }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> pending_;
    std::vector<std::string> names_;
};

std::vector<EvaluationReport> best_per_group(
    const std::vector<EvaluationReport>& reports) {
    // groups are contiguous runs with the same (train, test) pair
    std::vector<EvaluationReport> best;
    for (std::size_t i = 0; i < reports.size();) {
        std::size_t j = i;
        std::size_t top = i;
        while (j < reports.size() &&
               reports[j].train_corpus == reports[i].train_corpus &&
               reports[j].test_corpus == reports[i].test_corpus) {
            if (reports[j].mean.f1 > reports[top].mean.f1) top = j;
            ++j;
        }
        best.push_back(reports[top]);
        i = j;
    }
    return best;
}

int cmd_induce(const std::string& corpus_path, std::optional<CorpusFormat> fmt,
               Variant variant, int rank, const std::string& model_out,
               const std::string& classifier, bool use_star,
               std::uint64_t seed) {
    const Corpus corpus = load_with_report(corpus_path, fmt, "");

    SvdOptions svd_opts;
    svd_opts.seed = derive_seed(seed, 1);
    const InduceResult induced = induce_space(corpus, variant, rank, svd_opts);
    if (induced.clamped)
        std::cerr << "warning: rank " << rank << " exceeds the matrix rank; using "
                  << induced.space.rank << "\n";

    ModelFile model;
    model.space = induced.space;
    if (!classifier.empty()) {
        ExperimentConfig config;
        config.classifier = classifier_from_name(classifier);
        config.variant = variant;
        config.seed = seed;

        std::vector<DocumentVector> vecs = induced.training_vectors;
        if (use_star) {
            for (std::size_t i = 0; i < vecs.size(); ++i) {
                const auto& doc = corpus.documents[i];
                if (!doc.star_rating)
                    throw ValidationError("document '" + doc.id +
                                          "' has no star rating");
                vecs[i] = append_star(vecs[i], *doc.star_rating);
            }
        }
        std::vector<int> labels;
        for (const auto& doc : corpus.documents) labels.push_back(doc.label);
        model.classifier = train_classifier(config, vecs, labels,
                                            induced.space.rank,
                                            derive_seed(seed, 2));
        model.classifier_uses_star = use_star;
    }
    save_model(model_out, model);

    std::cout << "m=" << model.space.vocabulary.size()
              << " n=" << corpus.documents.size() << " rank=" << model.space.rank
              << " variant=" << variant_name(variant) << " model=" << model_out
              << "\n";
    return 0;
}

int cmd_evaluate(RunManifest manifest) {
    manifest.validate();

    std::vector<Corpus> corpora;
    corpora.reserve(manifest.corpora.size());
    for (const auto& [name, path] : manifest.corpora)
        corpora.push_back(load_with_report(path, std::nullopt, name));

    const auto& config = manifest.config;
    std::vector<EvaluationReport> sweep_rows;
    std::vector<EvaluationReport> summary_rows;
    nlohmann::json extra;

    if (manifest.regime == "in_corpus") {
        for (const auto& corpus : corpora) {
            std::cerr << "running in-corpus " << config.k_folds << "-fold on '"
                      << corpus.name << "'\n";
            const auto reports = run_in_corpus(corpus, config);
            sweep_rows.insert(sweep_rows.end(), reports.begin(), reports.end());
        }
        summary_rows = best_per_group(sweep_rows);
    } else if (manifest.regime == "inter_corpora") {
        for (const auto& train : corpora) {
            std::unordered_set<std::string> train_ids;
            for (const auto& doc : train.documents) train_ids.insert(doc.id);
            for (const auto& test : corpora) {
                if (train.name == test.name) continue;
                for (const auto& doc : test.documents)
                    if (train_ids.count(doc.id))
                        throw ValidationError("corpora '" + train.name + "' and '" +
                                              test.name + "' share document id '" +
                                              doc.id + "'");
                std::cerr << "running inter-corpora " << train.name << " -> "
                          << test.name << "\n";
                const auto reports = run_inter_corpora_sweep(train, test, config);
                sweep_rows.insert(sweep_rows.end(), reports.begin(), reports.end());
            }
        }
        summary_rows = best_per_group(sweep_rows);
    } else if (manifest.regime == "union") {
        std::cerr << "running union " << config.k_folds << "-fold over "
                  << corpora.size() << " corpora\n";
        sweep_rows = run_union_sweep(corpora, config);
        summary_rows = best_per_group(sweep_rows);
    } else if (manifest.regime == "sweep") {
        nlohmann::json best_ranks = nlohmann::json::object();
        for (const auto& corpus : corpora) {
            std::cerr << "sweeping ranks on '" << corpus.name << "'\n";
            const SweepResult result = sweep_and_select(corpus, config);
            sweep_rows.insert(sweep_rows.end(), result.reports.begin(),
                              result.reports.end());
            best_ranks[corpus.name] = result.best_rank;
            std::cerr << "best rank for '" << corpus.name
                      << "': " << result.best_rank << "\n";
        }
        extra["best_rank"] = best_ranks;
        summary_rows = best_per_group(sweep_rows);
    } else {
        throw ValidationError("unknown regime '" + manifest.regime + "'");
    }

    std::ostringstream csv, text, json_out;
    write_sweep_csv(csv, sweep_rows);
    write_summary_text(text, summary_rows);
    write_summary_json(json_out, summary_rows);

    nlohmann::json run;
    run["tool_version"] = kVersion;
    run["timestamp"] = timestamp_iso8601();
    run["regime"] = manifest.regime;
    run["seed"] = config.seed;
    run["variant"] = variant_name(config.variant);
    run["classifier"] = classifier_name(config.classifier);
    run["k_folds"] = config.k_folds;
    run["use_star"] = config.use_star;
    run["rank_grid"] = config.rank_grid;
    nlohmann::json paths = nlohmann::json::object();
    for (const auto& [name, path] : manifest.corpora) paths[name] = path;
    run["corpora"] = paths;
    if (!extra.empty()) run.update(extra);

    OutputStage stage(manifest.output_dir);
    stage.write("sweep.csv", csv.str());
    stage.write("summary.txt", text.str());
    stage.write("summary.json", json_out.str());
    stage.write("run.json", run.dump(2) + "\n");
    stage.commit();

    std::cerr << "wrote " << (manifest.output_dir / "sweep.csv").string()
              << ", summary.txt, summary.json\n";
    std::cout << text.str();
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& output_path) {
    const ModelFile model = load_model(model_path);
    if (!model.classifier)
        throw ValidationError(
            "model file has no classifier section; create one with "
            "'induce --classifier'");

    std::ifstream in(input_path);
    if (!in) throw IoError("cannot open input: " + input_path);

    std::ostringstream out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line;
        stripped.erase(0, stripped.find_first_not_of(" \t\r"));
        if (stripped.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        Document doc;
        doc.id = rec.contains("id") && rec["id"].is_string()
                     ? rec["id"].get<std::string>()
                     : std::to_string(lineno);
        doc.text = rec.contains("text") && rec["text"].is_string()
                       ? rec["text"].get<std::string>()
                       : "";
        if (rec.contains("star") && rec["star"].is_number_integer())
            doc.star_rating = rec["star"].get<int>();

        DocumentVector vec = fold_in(model.space, doc);
        if (model.classifier_uses_star) {
            if (!doc.star_rating)
                throw ValidationError("line " + std::to_string(lineno) +
                                      ": document '" + doc.id +
                                      "' has no star rating");
            vec = append_star(vec, *doc.star_rating);
        }
        const Prediction pred = predict(*model.classifier, vec.values);
        char score[32];
        std::snprintf(score, sizeof score, "%.9g", pred.score);
        out << doc.id << ',' << pred.label << ',' << score << ','
            << (vec.zero_flagged ? 1 : 0) << '\n';
    }

    if (output_path.empty() || output_path == "-") {
        std::cout << out.str();
    } else {
        std::ofstream file(output_path, std::ios::binary | std::ios::trunc);
        if (!file) throw IoError("cannot write output: " + output_path);
        file << out.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sarclab: LSA semantic spaces and classical classifiers for "
                 "binary sarcasm detection"};
    app.set_version_flag("--version", sarclab::kVersion);
    app.require_subcommand(1);

    // induce
    auto* induce = app.add_subcommand(
        "induce", "Induce a semantic space from a labeled corpus");
    std::string in_corpus_path, in_variant = "statistical", in_model_out;
    std::string in_format, in_classifier;
    int in_rank = 40;
    bool in_use_star = false;
    std::uint64_t in_seed = 42;
    induce->add_option("corpus", in_corpus_path, "corpus file (jsonl or csv)")
        ->required();
    induce->add_option("--format", in_format, "jsonl or csv (default: by extension)")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    induce->add_option("--variant", in_variant, "traditional or statistical")
        ->check(CLI::IsMember({"traditional", "statistical"}));
    induce->add_option("--rank,-r", in_rank, "target rank")->required();
    induce->add_option("--model-out,-o", in_model_out, "output model path")
        ->required();
    induce->add_option("--classifier", in_classifier,
                       "also train a classifier on the corpus")
        ->check(CLI::IsMember(
            {"svm", "logistic", "random_forest", "gradient_boosting"}));
    induce->add_flag("--use-star", in_use_star,
                     "append star ratings to document vectors");
    induce->add_option("--seed", in_seed, "random seed");

    // evaluate / sweep
    auto* evaluate = app.add_subcommand(
        "evaluate", "Run the experiment regime described by a manifest");
    std::string ev_manifest;
    std::optional<std::uint64_t> ev_seed;
    std::optional<int> ev_jobs;
    std::optional<std::string> ev_output;
    evaluate->add_option("manifest", ev_manifest, "manifest file")->required();
    evaluate->add_option("--seed", ev_seed, "override manifest seed");
    evaluate->add_option("--jobs,-j", ev_jobs, "parallel fold jobs");
    evaluate->add_option("--output-dir", ev_output, "override output directory");

    auto* sweep = app.add_subcommand(
        "sweep", "Dimensionality sweep (evaluate with regime=sweep)");
    std::string sw_manifest;
    std::optional<std::uint64_t> sw_seed;
    std::optional<int> sw_jobs;
    std::optional<std::string> sw_output;
    sweep->add_option("manifest", sw_manifest, "manifest file")->required();
    sweep->add_option("--seed", sw_seed, "override manifest seed");
    sweep->add_option("--jobs,-j", sw_jobs, "parallel fold jobs");
    sweep->add_option("--output-dir", sw_output, "override output directory");

    // predict
    auto* predict_cmd = app.add_subcommand(
        "predict", "Apply a trained model to jsonl documents");
    std::string pr_model, pr_input, pr_output;
    predict_cmd->add_option("--model,-m", pr_model, "model file")->required();
    predict_cmd->add_option("--input,-i", pr_input, "jsonl documents")->required();
    predict_cmd->add_option("--output,-o", pr_output, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (induce->parsed()) {
            std::optional<sarclab::CorpusFormat> fmt;
            if (in_format == "jsonl") fmt = sarclab::CorpusFormat::jsonl;
            if (in_format == "csv") fmt = sarclab::CorpusFormat::csv;
            return cmd_induce(in_corpus_path, fmt,
                              sarclab::variant_from_name(in_variant), in_rank,
                              in_model_out, in_classifier, in_use_star, in_seed);
        }
        if (evaluate->parsed() || sweep->parsed()) {
            const bool is_sweep = sweep->parsed();
            sarclab::RunManifest manifest =
                sarclab::load_manifest(is_sweep ? sw_manifest : ev_manifest);
            if (is_sweep) manifest.regime = "sweep";
            const auto& seed_opt = is_sweep ? sw_seed : ev_seed;
            const auto& jobs_opt = is_sweep ? sw_jobs : ev_jobs;
            const auto& out_opt = is_sweep ? sw_output : ev_output;
            if (seed_opt) manifest.config.seed = *seed_opt;
            if (jobs_opt) manifest.config.jobs = *jobs_opt;
            if (out_opt) manifest.output_dir = *out_opt;
            return cmd_evaluate(std::move(manifest));
        }
        if (predict_cmd->parsed())
            return cmd_predict(pr_model, pr_input, pr_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
