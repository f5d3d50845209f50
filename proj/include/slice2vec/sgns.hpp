#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "slice2vec/vocabulary.hpp"

namespace s2v {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TrainingConfig {
    int dims = 128;
    int window = 1;
    int negatives = 5;
    float initial_lr = 0.025f;
    float lr_floor = 1e-4f;
    int epochs = 5;
    std::uint64_t seed = 1;
    float noise_exponent = 0.75f;
    std::int64_t log_every = 2000;
    int threads = 1;  // >1 uses unsynchronized sparse updates; determinism waived
};

struct EmbeddingModel {
    RowMatrixXf input_vectors;   // V x n word embeddings
    RowMatrixXf output_vectors;  // V x n context embeddings
    Vocabulary vocabulary;
    TrainingConfig config;
};

// Input rows ~ U(-0.5/n, 0.5/n) from the seeded generator, output rows zero.
EmbeddingModel init_model(const Vocabulary& vocab, const TrainingConfig& config);

// Draws from the unigram distribution raised to `exponent`; draws equal to
// `exclude` are redrawn.
class NegativeSampler {
public:
    NegativeSampler(const Vocabulary& vocab, float exponent);

    int sample(std::mt19937_64& gen, int exclude) const;
    void sample_many(std::mt19937_64& gen, int k, int exclude, std::vector<int>& out) const;

private:
    std::vector<double> cdf_;
};

std::vector<int> sample_negatives(const Vocabulary& vocab, std::mt19937_64& gen, int k,
                                  int exclude, float exponent = 0.75f);

// One stochastic update for a (center, context) pair against k negatives.
// Returns the pre-update loss -log s(u_ctx.v) - sum -log s(-u_neg.v); dot
// products are clamped to +-30 before the sigmoid.
float sgns_step(EmbeddingModel& model, int center, int context,
                std::span<const int> negatives, float lr);

struct LossRecord {
    std::int64_t step = 0;       // training windows processed so far
    double mean_loss = 0.0;      // mean over the windows since the last record
};

using ProgressSink = std::function<void(const LossRecord&)>;

// Runs config.epochs passes over all skip-gram pairs with the learning rate
// decaying linearly from initial_lr to lr_floor. Single-threaded mode is
// bit-reproducible for a fixed seed.
std::vector<LossRecord> train(EmbeddingModel& model, const std::vector<TokenSequence>& sequences,
                              const ProgressSink& sink = nullptr);

}  // namespace s2v
