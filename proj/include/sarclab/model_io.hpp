#ifndef SARCLAB_MODEL_IO_HPP
#define SARCLAB_MODEL_IO_HPP

#include <filesystem>
#include <optional>

#include "sarclab/classifiers.hpp"
#include "sarclab/semantic_space.hpp"

namespace sarclab {

/// On-disk model: the induced space plus an optional trained classifier.
/// The format is a versioned binary container with tagged sections; floats
/// are stored as raw 64-bit to round-trip byte-exactly.
struct ModelFile {
    SemanticSpace space;
    std::optional<ClassifierModel> classifier;
    bool classifier_uses_star = false;
};

void save_model(const std::filesystem::path& path, const ModelFile& model);

ModelFile load_model(const std::filesystem::path& path);

}  // namespace sarclab

#endif
