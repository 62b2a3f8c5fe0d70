#include "sarclab/semantic_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "sarclab/errors.hpp"

namespace sarclab {

const char* variant_name(Variant v) {
    return v == Variant::traditional ? "traditional" : "statistical";
}

Variant variant_from_name(const std::string& name) {
    if (name == "traditional") return Variant::traditional;
    if (name == "statistical") return Variant::statistical;
    throw ValidationError("unknown variant '" + name +
                          "' (expected traditional or statistical)");
}

SemanticSpace SemanticSpace::truncated(int r) const {
    if (r < 1 || r > rank)
        throw std::out_of_range("SemanticSpace::truncated: rank " +
                                std::to_string(r) + " outside [1," +
                                std::to_string(rank) + "]");
    SemanticSpace out = *this;
    out.U_r = U_r.leftCols(r);
    out.sigma_r = sigma_r.head(r);
    out.rank = r;
    return out;
}

TermDocumentMatrix build_term_document_matrix(const Corpus& corpus,
                                              const Vocabulary& vocabulary) {
    if (corpus.documents.empty())
        throw ValidationError("build_term_document_matrix: empty corpus");
    const auto m = static_cast<Eigen::Index>(vocabulary.size());
    const auto n = static_cast<Eigen::Index>(corpus.documents.size());

    std::vector<Eigen::Triplet<double>> cells;
    for (Eigen::Index j = 0; j < n; ++j) {
        std::map<std::ptrdiff_t, double> counts;
        for (const auto& tok : tokenize(corpus.documents[j].text)) {
            const auto i = vocabulary.find(tok);
            if (i >= 0) counts[i] += 1.0;
        }
        for (const auto& [i, c] : counts)
            cells.emplace_back(static_cast<Eigen::Index>(i), j, c);
    }

    TermDocumentMatrix tdm;
    tdm.vocabulary = vocabulary;
    tdm.counts.resize(m, n);
    tdm.counts.setFromTriplets(cells.begin(), cells.end());
    tdm.counts.makeCompressed();
    return tdm;
}

std::pair<SpMatrix, std::vector<double>> tfidf_transform(
    const TermDocumentMatrix& A) {
    const auto m = A.n_tokens();
    const auto n = A.n_docs();

    std::vector<double> df(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < A.counts.outerSize(); ++j)
        for (SpMatrix::InnerIterator it(A.counts, j); it; ++it)
            if (it.value() > 0.0) df[static_cast<std::size_t>(it.row())] += 1.0;

    std::vector<double> idf(static_cast<std::size_t>(m), 0.0);
    for (std::size_t i = 0; i < idf.size(); ++i)
        if (df[i] > 0.0) idf[i] = std::log(static_cast<double>(n) / df[i]);

    SpMatrix M = A.counts;
    for (int j = 0; j < M.outerSize(); ++j)
        for (SpMatrix::InnerIterator it(M, j); it; ++it)
            it.valueRef() *= idf[static_cast<std::size_t>(it.row())];
    M.prune(0.0, 0.0);
    return {std::move(M), std::move(idf)};
}

std::pair<SpMatrix, double> statistical_normalize(const TermDocumentMatrix& A) {
    const double total = A.counts.sum();
    if (total <= 0.0)
        throw std::domain_error("statistical_normalize: matrix sums to zero");
    SpMatrix Q = A.counts / total;
    return {std::move(Q), total};
}

Matrix probability_amplitude(const Matrix& B) {
    if (!B.allFinite())
        throw ValidationError("probability_amplitude: non-finite entry");
    const double sq = B.array().max(0.0).square().sum();
    if (sq <= 0.0)
        throw std::domain_error("probability_amplitude: no positive entry");
    const double norm = std::sqrt(sq);
    return (B.array() > 0.0).select(B / norm, Matrix::Zero(B.rows(), B.cols()));
}

Matrix probability_distribution(const Matrix& B) {
    return B.array().square();
}

InduceResult induce_space(const Corpus& corpus, Variant variant, int r,
                          const SvdOptions& options) {
    if (corpus.documents.empty())
        throw ValidationError("induce_space: empty corpus");
    const Vocabulary vocab = build_vocabulary(corpus.documents);
    return induce_from_matrix(build_term_document_matrix(corpus, vocab), variant,
                              r, options);
}

InduceResult induce_from_matrix(const TermDocumentMatrix& A, Variant variant,
                                int r, const SvdOptions& options) {
    if (r < 1) throw ValidationError("induce: rank must be positive");

    SemanticSpace space;
    space.variant = variant;
    space.vocabulary = A.vocabulary;

    SpMatrix processed;
    if (variant == Variant::traditional) {
        auto [M, idf] = tfidf_transform(A);
        if (M.nonZeros() == 0)
            throw std::domain_error(
                "induce: tf-idf matrix is all zeros (degenerate corpus)");
        processed = std::move(M);
        space.idf = std::move(idf);
    } else {
        auto [Q, total] = statistical_normalize(A);
        processed = Q.cwiseSqrt();   // probability-amplitude form of Q
        space.grand_total = total;
    }

    TruncatedFactors factors = truncated_svd(processed, r, options);

    InduceResult result;
    result.requested_rank = r;
    result.clamped = factors.rank < r;
    space.U_r = std::move(factors.U_r);
    space.sigma_r = std::move(factors.sigma_r);
    space.rank = factors.rank;
    result.space = std::move(space);

    result.training_vectors.reserve(static_cast<std::size_t>(factors.V_r.rows()));
    for (Eigen::Index j = 0; j < factors.V_r.rows(); ++j)
        result.training_vectors.push_back(
            {factors.V_r.row(j).transpose(), false});
    return result;
}

DocumentVector fold_in(const SemanticSpace& space, const Document& document) {
    // vocabulary-indexed occurrence counts, unseen tokens dropped
    std::map<std::ptrdiff_t, double> counts;
    for (const auto& tok : tokenize(document.text)) {
        const auto i = space.vocabulary.find(tok);
        if (i >= 0) counts[i] += 1.0;
    }

    DocumentVector out;
    out.values = Vector::Zero(space.rank);
    if (counts.empty()) {
        out.zero_flagged = true;
        return out;
    }

    for (const auto& [i, c] : counts) {
        double q;
        if (space.variant == Variant::traditional) {
            q = c * space.idf[static_cast<std::size_t>(i)];
        } else {
            q = std::sqrt(c / space.grand_total);
        }
        if (q != 0.0)
            out.values += q * space.U_r.row(static_cast<Eigen::Index>(i))
                                  .transpose();
    }
    out.values.array() /= space.sigma_r.array();
    return out;
}

DocumentVector append_star(const DocumentVector& vector, int star) {
    if (star < 1 || star > 5)
        throw ValidationError("append_star: star rating " + std::to_string(star) +
                              " outside [1,5]");
    DocumentVector out;
    out.values.resize(vector.values.size() + 1);
    out.values.head(vector.values.size()) = vector.values;
    out.values(vector.values.size()) = static_cast<double>(star);
    out.zero_flagged = vector.zero_flagged;
    return out;
}

}  // namespace sarclab
