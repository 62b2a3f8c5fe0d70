#include "sarclab/linalg.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "sarclab/errors.hpp"
#include "sarclab/rng.hpp"

namespace sarclab {

namespace {

SvdFactors detect_rank(Matrix U, Vector sigma, Matrix V, double tol) {
    int k = 0;
    const double cutoff = sigma.size() > 0 ? tol * sigma(0) : 0.0;
    while (k < sigma.size() && sigma(k) > cutoff && sigma(k) > 0.0) ++k;
    SvdFactors out;
    out.U = U.leftCols(k);
    out.sigma = sigma.head(k);
    out.V = V.leftCols(k);
    return out;
}

SvdFactors svd_bdc(const Matrix& matrix, double tol) {
    Eigen::BDCSVD<Matrix> dec(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw NumericError("svd failed to converge");
    return detect_rank(dec.matrixU(), dec.singularValues(), dec.matrixV(), tol);
}

}  // namespace

SvdFactors svd(const Matrix& matrix, double rank_tolerance) {
    if (!matrix.allFinite())
        throw ValidationError("svd: matrix has non-finite entries");
    const Eigen::Index m = matrix.rows();
    const Eigen::Index n = matrix.cols();

    // QR-reduce strongly rectangular inputs before the bidiagonal solver
    if (m >= 2 * n) {
        Eigen::HouseholderQR<Matrix> qr(matrix);
        const Matrix q = qr.householderQ() * Matrix::Identity(m, n);
        const Matrix r =
            qr.matrixQR().topRows(n).template triangularView<Eigen::Upper>();
        SvdFactors f = svd_bdc(r, rank_tolerance);
        f.U = q * f.U;
        return f;
    }
    if (n >= 2 * m) {
        SvdFactors f = svd(matrix.transpose(), rank_tolerance);
        std::swap(f.U, f.V);
        return f;
    }
    return svd_bdc(matrix, rank_tolerance);
}

TruncatedFactors truncate(const SvdFactors& factors, int r) {
    if (r < 1 || r > factors.rank())
        throw std::out_of_range("truncate: r=" + std::to_string(r) +
                                " outside [1," + std::to_string(factors.rank()) +
                                "]");
    TruncatedFactors out;
    out.U_r = factors.U.leftCols(r);
    out.sigma_r = factors.sigma.head(r);
    out.V_r = factors.V.leftCols(r);
    out.rank = r;
    return out;
}

namespace {

// Halko-style range finder: Q approximates the column space of A using
// oversampled Gaussian probes and QR-reorthonormalized power iterations.
TruncatedFactors randomized_svd(const SpMatrix& a, int r, const SvdOptions& opt) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    const Eigen::Index probes =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(r) + opt.oversampling,
                               std::min(m, n));

    Rng rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix omega(n, probes);
    for (Eigen::Index j = 0; j < probes; ++j)
        for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = gauss(rng);

    auto thin_q = [](const Matrix& y) {
        Eigen::HouseholderQR<Matrix> qr(y);
        return Matrix(qr.householderQ() * Matrix::Identity(y.rows(), y.cols()));
    };

    Matrix q = thin_q(a * omega);
    for (int it = 0; it < opt.power_iterations; ++it) {
        const Matrix z = thin_q(a.transpose() * q);
        q = thin_q(a * z);
    }

    const Matrix b = q.transpose() * a;   // probes x n
    Eigen::BDCSVD<Matrix> dec(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw NumericError("randomized svd: projected decomposition failed");

    SvdFactors f = detect_rank(q * dec.matrixU(), dec.singularValues(),
                               dec.matrixV(), opt.rank_tolerance);
    return truncate(f, std::min(r, f.rank()));
}

}  // namespace

TruncatedFactors truncated_svd(const SpMatrix& matrix, int r,
                               const SvdOptions& options) {
    if (r < 1) throw std::out_of_range("truncated_svd: r must be positive");
    const Eigen::Index short_side = std::min(matrix.rows(), matrix.cols());
    if (short_side <= options.exact_threshold) {
        SvdFactors f = svd(Matrix(matrix), options.rank_tolerance);
        return truncate(f, std::min<int>(r, f.rank()));
    }
    return randomized_svd(matrix, r, options);
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("frobenius_distance: shape mismatch");
    return (b - a).norm();
}

double hellinger_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("hellinger_distance: shape mismatch");
    if ((a.array() < 0.0).any() || (b.array() < 0.0).any())
        throw std::domain_error("hellinger_distance: negative entry");
    return (b.array().sqrt() - a.array().sqrt()).matrix().norm();
}

}  // namespace sarclab
