#include "slice2vec/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slice2vec/errors.hpp"
#include "slice2vec/rng.hpp"

namespace s2v {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Eigen::MatrixXd d = sq.replicate(1, x.rows()) + sq.transpose().replicate(x.rows(), 1) -
                        2.0 * x * x.transpose();
    return d.cwiseMax(0.0);  // guard tiny negative rounding
}

// Student-t kernel weights w_ij = 1/(1+||y_i-y_j||^2), zero diagonal.
Eigen::MatrixXd student_weights(const Eigen::MatrixXd& y) {
    Eigen::MatrixXd w = (squared_distances(y).array() + 1.0).inverse();
    w.diagonal().setZero();
    return w;
}

}  // namespace

Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& points, double perplexity) {
    const auto n = points.rows();
    if (n < 3) throw DataError("t-SNE needs at least 3 points");
    if (perplexity < 2.0 || perplexity >= static_cast<double>(n))
        throw DataError("perplexity must lie in [2, N)");

    const Eigen::MatrixXd d = squared_distances(points);
    const double target_entropy = std::log2(perplexity);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);

    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_lo = 0.0;
        double beta_hi = std::numeric_limits<double>::infinity();

        // smallest off-diagonal distance anchors the exponent shift
        double d_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) d_min = std::min(d_min, d(i, j));

        Eigen::VectorXd row(n);
        for (int step = 0; step < 50; ++step) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                row[j] = j == i ? 0.0 : std::exp(-beta * (d(i, j) - d_min));
                sum += row[j];
            }
            row /= sum;
            double entropy = 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (row[j] > 0.0) entropy -= row[j] * std::log2(row[j]);

            const double diff = entropy - target_entropy;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0) {  // too flat, sharpen
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
            } else {
                beta_hi = beta;
                beta = 0.5 * (beta + beta_lo);
            }
        }
        p.row(i) = row.transpose();
    }
    return p;
}

Eigen::MatrixXd compute_affinities(const Eigen::MatrixXd& points, double perplexity) {
    const Eigen::MatrixXd cond = conditional_affinities(points, perplexity);
    return (cond + cond.transpose()) / (2.0 * static_cast<double>(points.rows()));
}

double kl_divergence(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y) {
    const Eigen::MatrixXd w = student_weights(Y);
    const double w_sum = w.sum();
    double kl = 0.0;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.cols(); ++j) {
            if (i == j || P(i, j) <= 0.0) continue;
            kl += P(i, j) * std::log(P(i, j) * w_sum / w(i, j));
        }
    return kl;
}

Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y) {
    const Eigen::MatrixXd w = student_weights(Y);
    const double w_sum = w.sum();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
        for (Eigen::Index j = 0; j < Y.rows(); ++j) {
            if (i == j) continue;
            const double mult = 4.0 * (P(i, j) - w(i, j) / w_sum) * w(i, j);
            grad.row(i) += mult * (Y.row(i) - Y.row(j));
        }
    return grad;
}

TsneResult tsne_embed(const Eigen::MatrixXd& points, const TsneConfig& config) {
    const auto n = points.rows();
    if (n < 3) throw DataError("t-SNE needs at least 3 points");
    if (config.iterations < 1) throw DataError("t-SNE needs at least 1 iteration");
    if (config.perplexity < 2.0) throw DataError("perplexity must be >= 2");

    const double perplexity =
        std::min(config.perplexity, std::max(2.0, (static_cast<double>(n) - 1.0) / 3.0));
    const Eigen::MatrixXd p = compute_affinities(points, perplexity);

    std::mt19937_64 gen(config.seed);
    Eigen::MatrixXd y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int d = 0; d < 2; ++d) y(i, d) = 1e-4 * gaussian(gen);

    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);

    TsneResult result;
    result.kl_trace.reserve(config.iterations);

    for (int iter = 0; iter < config.iterations; ++iter) {
        const bool exaggerate = iter < config.exaggeration_iters;
        const double momentum =
            iter < config.momentum_switch_iter ? config.initial_momentum : config.final_momentum;

        Eigen::MatrixXd grad =
            exaggerate ? kl_gradient((config.early_exaggeration * p).eval(), y)
                       : kl_gradient(p, y);
        grad *= 0.25;  // canonical optimizer scale: eta=200 assumes the factor 4 absorbed

        for (Eigen::Index i = 0; i < n; ++i)
            for (int d = 0; d < 2; ++d) {
                const bool same_sign = (grad(i, d) > 0.0) == (velocity(i, d) > 0.0);
                gains(i, d) = std::max(0.01, same_sign ? gains(i, d) * 0.8 : gains(i, d) + 0.2);
                velocity(i, d) =
                    momentum * velocity(i, d) - config.learning_rate * gains(i, d) * grad(i, d);
                y(i, d) += velocity(i, d);
            }
        y.rowwise() -= y.colwise().mean();

        if (!y.allFinite())
            throw NumericalError("numerical overflow at t-SNE iteration " + std::to_string(iter));
        result.kl_trace.push_back(kl_divergence(p, y));
    }
    result.embedding = std::move(y);
    return result;
}

}  // namespace s2v
