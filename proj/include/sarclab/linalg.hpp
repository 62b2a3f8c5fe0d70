#ifndef SARCLAB_LINALG_HPP
#define SARCLAB_LINALG_HPP

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sarclab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SpMatrix = Eigen::SparseMatrix<double>;

/// Thin SVD factors M = U * diag(sigma) * V^T, kept at the detected
/// numerical rank k (singular values below rank_tolerance * sigma_max
/// are dropped).
struct SvdFactors {
    Matrix U;       // m x k, orthonormal columns
    Vector sigma;   // length k, non-increasing, positive
    Matrix V;       // n x k, orthonormal columns

    int rank() const { return static_cast<int>(sigma.size()); }
};

struct TruncatedFactors {
    Matrix U_r;      // m x r
    Vector sigma_r;  // length r
    Matrix V_r;      // n x r
    int rank = 0;

    Matrix reconstruct() const {
        return U_r * sigma_r.asDiagonal() * V_r.transpose();
    }
};

struct SvdOptions {
    // exact decomposition up to this short-side size, randomized above
    int exact_threshold = 2000;
    int oversampling = 10;
    int power_iterations = 2;
    std::uint64_t seed = 42;
    double rank_tolerance = 1e-12;
};

/// Exact thin SVD of a dense matrix, truncated at the numerical rank.
SvdFactors svd(const Matrix& matrix, double rank_tolerance = 1e-12);

/// Keeps the leading r singular triplets. Throws std::out_of_range when
/// r exceeds the available rank.
TruncatedFactors truncate(const SvdFactors& factors, int r);

/// Rank-r factors of a sparse matrix. Uses the exact decomposition when the
/// short side is small enough, otherwise a randomized range finder driven by
/// sparse matrix-vector products. r is clamped to the detected rank.
TruncatedFactors truncated_svd(const SpMatrix& matrix, int r,
                               const SvdOptions& options = {});

double frobenius_distance(const Matrix& a, const Matrix& b);

/// sqrt(sum (sqrt(b_ij) - sqrt(a_ij))^2); entries must be non-negative.
double hellinger_distance(const Matrix& a, const Matrix& b);

}  // namespace sarclab

#endif
