#ifndef SARCLAB_CORPUS_HPP
#define SARCLAB_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sarclab {

/// A single labeled text. label is 0 (not sarcastic) or 1 (sarcastic).
struct Document {
    std::string id;
    std::string text;
    int label = 0;
    std::optional<int> star_rating;   // 1..5, review corpora only
    std::string source_corpus;
};

struct Corpus {
    std::string name;
    std::vector<Document> documents;

    std::size_t size() const { return documents.size(); }
    std::size_t count_label(int label) const;
    // true when every document carries a star rating
    bool has_star_ratings() const;
};

/// Ordered set of unique tokens with a reverse index.
class Vocabulary {
public:
    Vocabulary() = default;

    // returns the token's index, inserting it at the end if new
    std::size_t add(const std::string& token);
    // -1 if the token is unknown
    std::ptrdiff_t find(const std::string& token) const;

    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::string& token(std::size_t i) const { return tokens_[i]; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct FoldAssignment {
    int k = 0;
    std::unordered_map<std::string, int> assignment;   // document id -> fold

    int fold_of(const std::string& id) const;
};

enum class CorpusFormat { jsonl, csv };

struct LoadReport {
    std::size_t loaded = 0;
    std::size_t skipped = 0;               // records missing text or label
    std::vector<std::size_t> skipped_lines;
};

/// Splits text into maximal runs of alphanumeric characters or maximal runs
/// of punctuation/special symbols. Whitespace only separates. Alphanumeric
/// runs are lowercased.
std::vector<std::string> tokenize(const std::string& text);

/// All distinct tokens over the documents, in first-occurrence order.
Vocabulary build_vocabulary(const std::vector<Document>& documents);

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const std::string& name = "", LoadReport* report = nullptr);

CorpusFormat format_from_extension(const std::filesystem::path& path);

FoldAssignment stratified_kfold(const Corpus& corpus, int k, std::uint64_t seed);

/// Independent stratified k-fold per corpus, merged into one assignment.
/// Document ids must not collide across corpora.
FoldAssignment union_folds(const std::vector<Corpus>& corpora, int k,
                           std::uint64_t seed);

}  // namespace sarclab

#endif
