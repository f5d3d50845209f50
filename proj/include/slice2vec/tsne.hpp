#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace s2v {

struct TsneConfig {
    double perplexity = 30.0;  // clamped to (N-1)/3 when N is small
    int iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iter = 250;
    std::uint64_t seed = 1;
};

// Row-stochastic Gaussian neighbor probabilities; each row's bandwidth is
// bisected until the row entropy matches log2(perplexity) within 1e-5
// (at most 50 steps). Diagonal is zero.
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& points, double perplexity);

// (P + P^T) / 2N of the conditional affinities; entries sum to 1.
Eigen::MatrixXd compute_affinities(const Eigen::MatrixXd& points, double perplexity);

// KL(P || Q) with the Student-t kernel Q implied by the 2-D layout Y.
double kl_divergence(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y);

// Exact analytic gradient of kl_divergence with respect to Y.
Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y);

struct TsneResult {
    Eigen::MatrixXd embedding;     // N x 2
    std::vector<double> kl_trace;  // KL against the unexaggerated P per iteration
};

TsneResult tsne_embed(const Eigen::MatrixXd& points, const TsneConfig& config);

}  // namespace s2v
