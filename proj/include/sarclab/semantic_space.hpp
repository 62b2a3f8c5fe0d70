#ifndef SARCLAB_SEMANTIC_SPACE_HPP
#define SARCLAB_SEMANTIC_SPACE_HPP

#include <utility>
#include <vector>

#include "sarclab/corpus.hpp"
#include "sarclab/linalg.hpp"

namespace sarclab {

enum class Variant { traditional, statistical };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Raw token co-occurrence counts, tokens x documents.
struct TermDocumentMatrix {
    Vocabulary vocabulary;
    SpMatrix counts;

    Eigen::Index n_tokens() const { return counts.rows(); }
    Eigen::Index n_docs() const { return counts.cols(); }
};

/// An induced LSA space: the token factors plus whatever the variant needs
/// to map unseen documents (idf weights or the training mass).
struct SemanticSpace {
    Variant variant = Variant::traditional;
    Matrix U_r;                // m x r
    Vector sigma_r;            // length r, strictly positive
    int rank = 0;
    std::vector<double> idf;   // traditional only, length m
    double grand_total = 0.0;  // statistical only
    Vocabulary vocabulary;

    /// Leading-rank slice of this space (prefix columns of U_r).
    SemanticSpace truncated(int r) const;
};

struct DocumentVector {
    Vector values;
    bool zero_flagged = false;   // no in-vocabulary tokens
};

struct InduceResult {
    SemanticSpace space;
    std::vector<DocumentVector> training_vectors;   // rows of V_r
    int requested_rank = 0;
    bool clamped = false;        // rank reduced to the available rank
};

TermDocumentMatrix build_term_document_matrix(const Corpus& corpus,
                                              const Vocabulary& vocabulary);

/// M[i][j] = counts[i][j] * ln(n / df_i); tokens present in every document
/// weight to zero.
std::pair<SpMatrix, std::vector<double>> tfidf_transform(
    const TermDocumentMatrix& A);

/// Q = A / sum of all entries.
std::pair<SpMatrix, double> statistical_normalize(const TermDocumentMatrix& A);

/// Normalizes the positive entries of B to unit square-sum; non-positive
/// entries map to zero.
Matrix probability_amplitude(const Matrix& B);

/// Elementwise square.
Matrix probability_distribution(const Matrix& B);

InduceResult induce_space(const Corpus& corpus, Variant variant, int r,
                          const SvdOptions& options = {});

/// Induction over a prebuilt term-document matrix (the cross-validation
/// driver builds these from training folds only).
InduceResult induce_from_matrix(const TermDocumentMatrix& A, Variant variant,
                                int r, const SvdOptions& options = {});

DocumentVector fold_in(const SemanticSpace& space, const Document& document);

DocumentVector append_star(const DocumentVector& vector, int star);

}  // namespace sarclab

#endif
