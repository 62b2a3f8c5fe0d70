#ifndef SARCLAB_MANIFEST_HPP
#define SARCLAB_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sarclab/evaluation.hpp"

namespace sarclab {

/// Declarative experiment description. Flat key-value text with optional
/// [sections]; environment variables prefixed SARCLAB_ override top-level
/// keys (e.g. SARCLAB_SEED, SARCLAB_OUTPUT_DIR).
struct RunManifest {
    std::string regime = "in_corpus";   // in_corpus|inter_corpora|union|sweep
    ExperimentConfig config;
    std::vector<std::pair<std::string, std::string>> corpora;  // name -> path
    std::filesystem::path output_dir = "out";

    void validate() const;
};

RunManifest load_manifest(const std::filesystem::path& path);

/// Parse from text; `source` names the input in error messages.
RunManifest parse_manifest(const std::string& text, const std::string& source);

}  // namespace sarclab

#endif
