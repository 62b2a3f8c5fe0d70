#include <cmath>
#include <deque>

#include "sarclab/classifiers.hpp"
#include "sarclab/errors.hpp"

namespace sarclab {

namespace {

double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

// ln(1 + e^s) without overflow
double softplus(double s) {
    return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

Vector scores(const TrainingSet& data, const Vector& beta) {
    const auto d = data.X.cols();
    return (data.X * beta.head(d)).array() + beta(d);
}

double data_loss(const TrainingSet& data, const Vector& beta) {
    const Vector s = scores(data, beta);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        loss += data.weights(i) * (softplus(s(i)) - data.y[static_cast<std::size_t>(i)] * s(i));
    return loss;
}

Vector data_gradient(const TrainingSet& data, const Vector& beta) {
    const auto d = data.X.cols();
    const Vector s = scores(data, beta);
    Vector resid(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        resid(i) = data.weights(i) *
                   (sigmoid(s(i)) - data.y[static_cast<std::size_t>(i)]);
    Vector grad(d + 1);
    grad.head(d) = data.X.transpose() * resid;
    grad(d) = resid.sum();
    return grad;
}

void check_training_set(const TrainingSet& data) {
    const auto n = data.X.rows();
    if (n < 2 || data.y.size() != static_cast<std::size_t>(n) ||
        data.weights.size() != n)
        throw ValidationError("training set needs >= 2 consistent examples");
}

}  // namespace

std::pair<double, double> balanced_class_weights(const std::vector<int>& labels) {
    double n0 = 0.0, n1 = 0.0;
    for (int y : labels) (y == 1 ? n1 : n0) += 1.0;
    if (n0 == 0.0 || n1 == 0.0)
        throw ValidationError("balanced_class_weights: both classes required");
    const double n = n0 + n1;
    return {n / (2.0 * n0), n / (2.0 * n1)};
}

TrainingSet make_training_set(const std::vector<DocumentVector>& vectors,
                              const std::vector<int>& labels, bool balanced) {
    if (vectors.empty() || vectors.size() != labels.size())
        throw ValidationError("make_training_set: size mismatch");
    const auto d = vectors.front().values.size();

    TrainingSet out;
    out.X.resize(static_cast<Eigen::Index>(vectors.size()), d);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].values.size() != d)
            throw ValidationError("make_training_set: inconsistent dimensions");
        if (!vectors[i].values.allFinite())
            throw ValidationError("make_training_set: non-finite vector");
        out.X.row(static_cast<Eigen::Index>(i)) = vectors[i].values.transpose();
    }
    out.y = labels;
    const auto balanced_weights = balanced_class_weights(labels);   // also checks both classes present
    if (balanced) out.class_weights = balanced_weights;
    out.weights.resize(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        out.weights(static_cast<Eigen::Index>(i)) =
            labels[i] == 1 ? out.class_weights.second : out.class_weights.first;
    return out;
}

double logistic_objective(const TrainingSet& data, const Vector& beta,
                          Penalty penalty, double C) {
    const auto d = data.X.cols();
    const double lambda = 1.0 / C;
    const double reg = penalty == Penalty::l2
                           ? 0.5 * beta.head(d).squaredNorm()
                           : beta.head(d).cwiseAbs().sum();
    return data_loss(data, beta) + lambda * reg;
}

Vector logistic_gradient(const TrainingSet& data, const Vector& beta,
                         Penalty penalty, double C) {
    const auto d = data.X.cols();
    const double lambda = 1.0 / C;
    Vector grad = data_gradient(data, beta);
    if (penalty == Penalty::l2) {
        grad.head(d) += lambda * beta.head(d);
    } else {
        for (Eigen::Index j = 0; j < d; ++j)
            grad(j) += lambda * (beta(j) > 0.0 ? 1.0 : beta(j) < 0.0 ? -1.0 : 0.0);
    }
    return grad;
}

namespace {

// Damped Newton for the L2 objective. The damping parameter grows until a
// step decreases the objective, mimicking a shrinking trust region.
LogisticModel solve_l2(const TrainingSet& data, double C,
                       const LogisticOptions& opt) {
    const auto d = data.X.cols();
    const auto n = data.X.rows();
    const double lambda = 1.0 / C;

    LogisticModel model;
    model.penalty = Penalty::l2;
    model.C = C;
    model.beta = Vector::Zero(d + 1);

    double f = logistic_objective(data, model.beta, Penalty::l2, C);
    model.objective_trace.push_back(f);
    double mu = 0.0;

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        const Vector grad = logistic_gradient(data, model.beta, Penalty::l2, C);
        if (grad.norm() <= opt.tol_l2) return model;

        const Vector s = scores(data, model.beta);
        Vector h(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(s(i));
            h(i) = data.weights(i) * p * (1.0 - p);
        }
        Matrix hess(d + 1, d + 1);
        hess.topLeftCorner(d, d) =
            data.X.transpose() * h.asDiagonal() * data.X +
            lambda * Matrix::Identity(d, d);
        const Vector xh = data.X.transpose() * h;
        hess.topRightCorner(d, 1) = xh;
        hess.bottomLeftCorner(1, d) = xh.transpose();
        hess(d, d) = h.sum() + 1e-12;

        bool accepted = false;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            Matrix damped = hess;
            damped.diagonal().array() += mu;
            const Vector step = damped.ldlt().solve(-grad);
            const Vector candidate = model.beta + step;
            const double fc = logistic_objective(data, candidate, Penalty::l2, C);
            if (std::isfinite(fc) && fc < f) {
                model.beta = candidate;
                f = fc;
                model.objective_trace.push_back(f);
                mu = mu > 0.0 ? mu / 4.0 : 0.0;
                accepted = true;
            } else {
                mu = mu > 0.0 ? mu * 10.0 : 1e-8;
            }
        }
        if (!accepted) {
            // no strict decrease representable: numerical optimum
            if (grad.norm() <= 10.0 * opt.tol_l2) return model;
            throw NumericError(
                "logistic (l2): no acceptable step; gradient norm " +
                std::to_string(grad.norm()));
        }
    }
    const double gnorm =
        logistic_gradient(data, model.beta, Penalty::l2, C).norm();
    if (gnorm <= opt.tol_l2) return model;
    throw NumericError("logistic (l2) did not converge: gradient norm " +
                       std::to_string(gnorm));
}

// Orthant-wise L-BFGS for the L1 objective.
class OwlQn {
public:
    OwlQn(const TrainingSet& data, double C, const LogisticOptions& opt)
        : data_(data), d_(data.X.cols()), lambda_(1.0 / C), opt_(opt) {}

    LogisticModel run(double C) {
        LogisticModel model;
        model.penalty = Penalty::l1;
        model.C = C;

        Vector x = Vector::Zero(d_ + 1);
        Vector grad = data_gradient(data_, x);
        double f = objective(x);
        model.objective_trace.push_back(f);

        for (int iter = 0; iter < opt_.max_iter; ++iter) {
            const Vector pg = pseudo_gradient(x, grad);
            if (pg.lpNorm<Eigen::Infinity>() <= opt_.tol_l1) {
                model.beta = x;
                return model;
            }

            Vector dir = lbfgs_direction(pg);
            // keep the direction inside the descent orthant
            for (Eigen::Index j = 0; j <= d_; ++j)
                if (dir(j) * -pg(j) <= 0.0) dir(j) = 0.0;
            if (dir.norm() == 0.0)
                throw NumericError(
                    "logistic (l1): projected direction vanished; optimality "
                    "residual " +
                    std::to_string(pg.lpNorm<Eigen::Infinity>()));

            // orthant sign for the projected line search
            Vector xi(d_ + 1);
            for (Eigen::Index j = 0; j <= d_; ++j)
                xi(j) = x(j) != 0.0 ? (x(j) > 0.0 ? 1.0 : -1.0)
                                    : (-pg(j) > 0.0 ? 1.0 : -pg(j) < 0.0 ? -1.0 : 0.0);

            double alpha = 1.0;
            bool accepted = false;
            Vector xn, gn;
            for (int ls = 0; ls < 50; ++ls, alpha *= 0.5) {
                xn = x + alpha * dir;
                for (Eigen::Index j = 0; j < d_; ++j)   // intercept unprojected
                    if (xn(j) * xi(j) < 0.0) xn(j) = 0.0;
                const double fn = objective(xn);
                const double dec = pg.dot(xn - x);
                if (std::isfinite(fn) && fn <= f + 1e-4 * dec && dec <= 0.0) {
                    gn = data_gradient(data_, xn);
                    push_history(xn - x, gn - grad);
                    x = xn;
                    grad = gn;
                    f = fn;
                    model.objective_trace.push_back(f);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                const Vector check = pseudo_gradient(x, grad);
                if (check.lpNorm<Eigen::Infinity>() <= 1e2 * opt_.tol_l1) {
                    model.beta = x;
                    return model;
                }
                throw NumericError("logistic (l1): line search failed");
            }
        }
        const double residual =
            pseudo_gradient(x, data_gradient(data_, x)).lpNorm<Eigen::Infinity>();
        if (residual <= opt_.tol_l1) {
            model.beta = x;
            return model;
        }
        throw NumericError("logistic (l1) did not converge: optimality residual " +
                           std::to_string(residual));
    }

private:
    double objective(const Vector& x) const {
        return data_loss(data_, x) + lambda_ * x.head(d_).cwiseAbs().sum();
    }

    Vector pseudo_gradient(const Vector& x, const Vector& grad) const {
        Vector pg = grad;
        for (Eigen::Index j = 0; j < d_; ++j) {
            if (x(j) > 0.0) {
                pg(j) += lambda_;
            } else if (x(j) < 0.0) {
                pg(j) -= lambda_;
            } else if (grad(j) + lambda_ < 0.0) {
                pg(j) += lambda_;
            } else if (grad(j) - lambda_ > 0.0) {
                pg(j) -= lambda_;
            } else {
                pg(j) = 0.0;
            }
        }
        return pg;
    }

    Vector lbfgs_direction(const Vector& pg) const {
        Vector q = -pg;
        std::vector<double> alpha(hist_s_.size());
        for (std::size_t i = hist_s_.size(); i-- > 0;) {
            alpha[i] = rho_[i] * hist_s_[i].dot(q);
            q -= alpha[i] * hist_y_[i];
        }
        if (!hist_s_.empty()) {
            const auto& s = hist_s_.back();
            const auto& y = hist_y_.back();
            q *= s.dot(y) / y.dot(y);
        }
        for (std::size_t i = 0; i < hist_s_.size(); ++i) {
            const double beta = rho_[i] * hist_y_[i].dot(q);
            q += (alpha[i] - beta) * hist_s_[i];
        }
        return q;
    }

    void push_history(const Vector& s, const Vector& y) {
        const double sy = s.dot(y);
        if (sy <= 1e-12) return;
        hist_s_.push_back(s);
        hist_y_.push_back(y);
        rho_.push_back(1.0 / sy);
        if (hist_s_.size() > 10) {
            hist_s_.pop_front();
            hist_y_.pop_front();
            rho_.pop_front();
        }
    }

    const TrainingSet& data_;
    Eigen::Index d_;
    double lambda_;
    LogisticOptions opt_;
    std::deque<Vector> hist_s_, hist_y_;
    std::deque<double> rho_;
};

}  // namespace

LogisticModel train_logistic(const TrainingSet& data, Penalty penalty, double C,
                             const LogisticOptions& options) {
    check_training_set(data);
    if (C <= 0.0) throw ValidationError("train_logistic: C must be positive");
    if (penalty == Penalty::l2) return solve_l2(data, C, options);
    return OwlQn(data, C, options).run(C);
}

Prediction predict_logistic(const LogisticModel& model, const Vector& v) {
    if (v.size() + 1 != model.beta.size())
        throw ValidationError("predict_logistic: dimension mismatch (got " +
                              std::to_string(v.size()) + ", expected " +
                              std::to_string(model.beta.size() - 1) + ")");
    const double s = model.beta.head(v.size()).dot(v) + model.beta(v.size());
    const double p = sigmoid(s);
    return {p >= 0.5 ? 1 : 0, p};
}

}  // namespace sarclab
