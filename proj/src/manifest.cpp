#include "sarclab/manifest.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sarclab/errors.hpp"

namespace sarclab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       const std::string& message) {
    throw ValidationError(source + ":" + std::to_string(line) + ": " + message);
}

long to_long(const std::string& v, const std::string& source, std::size_t line) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        fail(source, line, "expected an integer, got '" + v + "'");
    }
}

double to_double(const std::string& v, const std::string& source,
                 std::size_t line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        fail(source, line, "expected a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& source, std::size_t line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(source, line, "expected a boolean, got '" + v + "'");
}

std::vector<int> to_rank_grid(const std::string& v, const std::string& source,
                              std::size_t line) {
    std::string normalized = v;
    for (auto& c : normalized)
        if (c == ',') c = ' ';
    std::istringstream in(normalized);
    std::vector<int> grid;
    std::string tok;
    while (in >> tok)
        grid.push_back(static_cast<int>(to_long(tok, source, line)));
    if (grid.empty()) fail(source, line, "rank_grid is empty");
    return grid;
}

struct KeyHandlerContext {
    RunManifest& manifest;
    const std::string& source;
};

void apply_top_level(KeyHandlerContext ctx, const std::string& key,
                     const std::string& value, std::size_t line) {
    auto& cfg = ctx.manifest.config;
    if (key == "regime") {
        if (value != "in_corpus" && value != "inter_corpora" &&
            value != "union" && value != "sweep")
            fail(ctx.source, line, "unknown regime '" + value + "'");
        ctx.manifest.regime = value;
    } else if (key == "variant") {
        cfg.variant = variant_from_name(value);
    } else if (key == "classifier") {
        cfg.classifier = classifier_from_name(value);
    } else if (key == "rank_grid") {
        cfg.rank_grid = to_rank_grid(value, ctx.source, line);
    } else if (key == "k_folds") {
        cfg.k_folds = static_cast<int>(to_long(value, ctx.source, line));
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(to_long(value, ctx.source, line));
    } else if (key == "use_star") {
        cfg.use_star = to_bool(value, ctx.source, line);
    } else if (key == "jobs") {
        cfg.jobs = static_cast<int>(to_long(value, ctx.source, line));
    } else if (key == "exact_svd_threshold") {
        cfg.exact_svd_threshold =
            static_cast<int>(to_long(value, ctx.source, line));
    } else if (key == "balance_trees") {
        cfg.balance_trees = to_bool(value, ctx.source, line);
    } else if (key == "output_dir") {
        ctx.manifest.output_dir = value;
    } else {
        fail(ctx.source, line, "unknown key '" + key + "'");
    }
}

void apply_sectioned(KeyHandlerContext ctx, const std::string& section,
                     const std::string& key, const std::string& value,
                     std::size_t line) {
    auto& cfg = ctx.manifest.config;
    if (section == "corpora") {
        ctx.manifest.corpora.emplace_back(key, value);
    } else if (section == "logistic") {
        if (key == "penalty") {
            if (value == "l1") cfg.logistic.penalty = Penalty::l1;
            else if (value == "l2") cfg.logistic.penalty = Penalty::l2;
            else fail(ctx.source, line, "penalty must be l1 or l2");
        } else if (key == "c") {
            cfg.logistic.C = to_double(value, ctx.source, line);
        } else {
            fail(ctx.source, line, "unknown logistic key '" + key + "'");
        }
    } else if (section == "svm") {
        if (key == "c") cfg.svm.C = to_double(value, ctx.source, line);
        else if (key == "gamma") cfg.svm.gamma = to_double(value, ctx.source, line);
        else fail(ctx.source, line, "unknown svm key '" + key + "'");
    } else if (section == "random_forest") {
        if (key == "n_trees")
            cfg.forest.n_trees = static_cast<int>(to_long(value, ctx.source, line));
        else if (key == "max_depth")
            cfg.forest.max_depth = static_cast<int>(to_long(value, ctx.source, line));
        else fail(ctx.source, line, "unknown random_forest key '" + key + "'");
    } else if (section == "gradient_boosting") {
        if (key == "n_trees")
            cfg.boost.n_trees = static_cast<int>(to_long(value, ctx.source, line));
        else if (key == "learning_rate")
            cfg.boost.learning_rate = to_double(value, ctx.source, line);
        else if (key == "max_depth")
            cfg.boost.max_depth = static_cast<int>(to_long(value, ctx.source, line));
        else fail(ctx.source, line, "unknown gradient_boosting key '" + key + "'");
    } else {
        fail(ctx.source, line, "unknown section [" + section + "]");
    }
}

void apply_env_overrides(RunManifest& manifest) {
    const std::string source = "environment";
    const std::pair<const char*, const char*> keys[] = {
        {"SARCLAB_REGIME", "regime"},
        {"SARCLAB_VARIANT", "variant"},
        {"SARCLAB_CLASSIFIER", "classifier"},
        {"SARCLAB_RANK_GRID", "rank_grid"},
        {"SARCLAB_K_FOLDS", "k_folds"},
        {"SARCLAB_SEED", "seed"},
        {"SARCLAB_USE_STAR", "use_star"},
        {"SARCLAB_JOBS", "jobs"},
        {"SARCLAB_OUTPUT_DIR", "output_dir"},
    };
    for (const auto& [env, key] : keys) {
        if (const char* value = std::getenv(env))
            apply_top_level({manifest, source}, key, value, 0);
    }
}

}  // namespace

void RunManifest::validate() const {
    config.validate();
    if (corpora.empty())
        throw ValidationError("manifest lists no corpora");
    for (const auto& [name, path] : corpora)
        if (!std::filesystem::exists(path))
            throw ValidationError("corpus path does not exist: " + path +
                                  " (corpus '" + name + "')");
    if (regime == "inter_corpora" && corpora.size() < 2)
        throw ValidationError("inter_corpora regime needs two corpora");
}

RunManifest parse_manifest(const std::string& text, const std::string& source) {
    RunManifest manifest;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto comment = raw.find('#');
        const std::string stripped =
            trim(comment == std::string::npos ? raw : raw.substr(0, comment));
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                fail(source, line, "malformed section header");
            section = trim(stripped.substr(1, stripped.size() - 2));
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            fail(source, line, "expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) fail(source, line, "empty key");
        if (section.empty())
            apply_top_level({manifest, source}, key, value, line);
        else
            apply_sectioned({manifest, source}, section, key, value, line);
    }
    apply_env_overrides(manifest);
    return manifest;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open manifest: " + path.string());
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse_manifest(buffer.str(), path.string());
}

}  // namespace sarclab
