#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "sarclab/classifiers.hpp"
#include "sarclab/errors.hpp"

namespace sarclab {

double gaussian_kernel(const Vector& x, const Vector& y, double gamma) {
    if (x.size() != y.size())
        throw ValidationError("gaussian_kernel: dimension mismatch");
    return std::exp(-gamma * (x - y).squaredNorm());
}

namespace {

// LRU cache of kernel rows. A row holds K(i, j) for all j.
class KernelCache {
public:
    KernelCache(const Matrix& x, double gamma, std::size_t budget_bytes)
        : x_(x), gamma_(gamma) {
        const std::size_t row_bytes =
            static_cast<std::size_t>(x.rows()) * sizeof(double);
        max_rows_ = std::max<std::size_t>(2, budget_bytes / std::max<std::size_t>(row_bytes, 1));
    }

    const Vector& row(Eigen::Index i) {
        auto it = rows_.find(i);
        if (it != rows_.end()) {
            order_.splice(order_.begin(), order_, it->second.second);
            return it->second.first;
        }
        if (rows_.size() >= max_rows_) {
            const auto victim = order_.back();
            order_.pop_back();
            rows_.erase(victim);
        }
        Vector k(x_.rows());
        const auto xi = x_.row(i);
        for (Eigen::Index j = 0; j < x_.rows(); ++j)
            k(j) = std::exp(-gamma_ * (x_.row(j) - xi).squaredNorm());
        order_.push_front(i);
        auto [pos, inserted] =
            rows_.emplace(i, std::make_pair(std::move(k), order_.begin()));
        return pos->second.first;
    }

private:
    const Matrix& x_;
    double gamma_;
    std::size_t max_rows_;
    std::unordered_map<Eigen::Index,
                       std::pair<Vector, std::list<Eigen::Index>::iterator>>
        rows_;
    std::list<Eigen::Index> order_;
};

}  // namespace

SvmModel train_svm(const TrainingSet& data, double C, double gamma,
                   const SvmOptions& options) {
    const Eigen::Index n = data.X.rows();
    if (n < 2 || data.y.size() != static_cast<std::size_t>(n))
        throw ValidationError("train_svm: inconsistent training set");
    if (C <= 0.0 || gamma <= 0.0)
        throw ValidationError("train_svm: C and gamma must be positive");

    Vector y(n);        // +-1
    Vector cap(n);      // per-example box constraint C * class weight
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = data.y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        cap(i) = C * data.weights(i);
    }

    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);   // d/da of (1/2)aQa - e.a at a=0
    KernelCache cache(data.X, gamma, options.cache_bytes);

    const std::uint64_t max_iter =
        options.max_epochs * static_cast<std::uint64_t>(n);
    double m_up = 0.0, m_low = 0.0;
    bool converged = false;

    for (std::uint64_t iter = 0; iter < max_iter; ++iter) {
        // maximal violating pair
        Eigen::Index i = -1, j = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -y(t) * grad(t);
            const bool up = (y(t) > 0.0 && alpha(t) < cap(t)) ||
                            (y(t) < 0.0 && alpha(t) > 0.0);
            const bool low = (y(t) > 0.0 && alpha(t) > 0.0) ||
                             (y(t) < 0.0 && alpha(t) < cap(t));
            if (up && v > m_up) {
                m_up = v;
                i = t;
            }
            if (low && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || m_up - m_low <= options.tol) {
            converged = true;
            break;
        }

        const Vector& ki = cache.row(i);
        const Vector& kj = cache.row(j);
        const double old_i = alpha(i);
        const double old_j = alpha(j);

        if (y(i) != y(j)) {
            const double quad = std::max(2.0 + 2.0 * ki(j), 1e-12);
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = alpha(i) - alpha(j);
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0.0 && alpha(j) < 0.0) {
                alpha(j) = 0.0;
                alpha(i) = diff;
            } else if (diff <= 0.0 && alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = -diff;
            }
            if (diff > cap(i) - cap(j) && alpha(i) > cap(i)) {
                alpha(i) = cap(i);
                alpha(j) = cap(i) - diff;
            } else if (diff <= cap(i) - cap(j) && alpha(j) > cap(j)) {
                alpha(j) = cap(j);
                alpha(i) = cap(j) + diff;
            }
        } else {
            const double quad = std::max(2.0 - 2.0 * ki(j), 1e-12);
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = alpha(i) + alpha(j);
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > cap(i) && alpha(i) > cap(i)) {
                alpha(i) = cap(i);
                alpha(j) = sum - cap(i);
            } else if (sum <= cap(i) && alpha(j) < 0.0) {
                alpha(j) = 0.0;
                alpha(i) = sum;
            }
            if (sum > cap(j) && alpha(j) > cap(j)) {
                alpha(j) = cap(j);
                alpha(i) = sum - cap(j);
            } else if (sum <= cap(j) && alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = sum;
            }
        }

        const double di = alpha(i) - old_i;
        const double dj = alpha(j) - old_j;
        for (Eigen::Index t = 0; t < n; ++t)
            grad(t) += y(t) * (y(i) * ki(t) * di + y(j) * kj(t) * dj);
    }

    if (!converged)
        throw NumericError("svm did not converge: violation gap " +
                           std::to_string(m_up - m_low));

    // bias from free support vectors, midpoint fallback
    double b_sum = 0.0;
    int b_count = 0;
    for (Eigen::Index t = 0; t < n; ++t)
        if (alpha(t) > 1e-12 && alpha(t) < cap(t) - 1e-12) {
            b_sum += -y(t) * grad(t);
            ++b_count;
        }
    const double bias = b_count > 0 ? b_sum / b_count : (m_up + m_low) / 2.0;

    std::vector<Eigen::Index> sv;
    for (Eigen::Index t = 0; t < n; ++t)
        if (alpha(t) > 1e-12) sv.push_back(t);

    SvmModel model;
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()),
                                 data.X.cols());
    model.dual_coefs.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.support_vectors.row(static_cast<Eigen::Index>(k)) =
            data.X.row(sv[k]);
        model.dual_coefs(static_cast<Eigen::Index>(k)) = alpha(sv[k]) * y(sv[k]);
    }
    model.bias = bias;
    model.gamma = gamma;
    model.C = C;
    return model;
}

double svm_decision(const SvmModel& model, const Vector& v) {
    if (v.size() != model.support_vectors.cols())
        throw ValidationError("svm_decision: dimension mismatch (got " +
                              std::to_string(v.size()) + ", expected " +
                              std::to_string(model.support_vectors.cols()) + ")");
    double f = model.bias;
    for (Eigen::Index k = 0; k < model.support_vectors.rows(); ++k)
        f += model.dual_coefs(k) *
             std::exp(-model.gamma *
                      (model.support_vectors.row(k).transpose() - v).squaredNorm());
    return f;
}

Prediction predict_svm(const SvmModel& model, const Vector& v) {
    const double f = svm_decision(model, v);
    return {f >= 0.0 ? 1 : 0, f};
}

}  // namespace sarclab
