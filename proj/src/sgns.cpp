#include "slice2vec/sgns.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "slice2vec/errors.hpp"
#include "slice2vec/rng.hpp"

namespace s2v {

namespace {

constexpr float kMaxDot = 30.0f;

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// -log sigmoid(x) for x already clamped to +-kMaxDot
inline double neg_log_sigmoid(double x) { return std::log1p(std::exp(-x)); }

inline float lr_at(std::int64_t step, std::int64_t total_steps, const TrainingConfig& cfg) {
    if (total_steps <= 1) return cfg.lr_floor;
    const double t = static_cast<double>(step) / static_cast<double>(total_steps - 1);
    return static_cast<float>(cfg.initial_lr + (cfg.lr_floor - cfg.initial_lr) * t);
}

}  // namespace

EmbeddingModel init_model(const Vocabulary& vocab, const TrainingConfig& config) {
    if (vocab.size() < 2)
        throw DataError("cannot sample negatives: vocabulary has fewer than 2 words");
    if (config.dims < 1) throw DataError("embedding dimensionality must be >= 1");

    EmbeddingModel model;
    model.vocabulary = vocab;
    model.config = config;

    const int v = vocab.size();
    const int n = config.dims;
    model.input_vectors.resize(v, n);
    model.output_vectors = RowMatrixXf::Zero(v, n);

    std::mt19937_64 gen(config.seed);
    const double half = 0.5 / n;
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < n; ++j)
            model.input_vectors(i, j) = static_cast<float>(uniform_range(gen, -half, half));
    return model;
}

NegativeSampler::NegativeSampler(const Vocabulary& vocab, float exponent) {
    if (vocab.size() < 2)
        throw DataError("cannot sample negatives: vocabulary has fewer than 2 words");
    cdf_.resize(vocab.size());
    double running = 0.0;
    for (int i = 0; i < vocab.size(); ++i) {
        running += std::pow(static_cast<double>(vocab.count(i)), exponent);
        cdf_[i] = running;
    }
}

int NegativeSampler::sample(std::mt19937_64& gen, int exclude) const {
    const double total = cdf_.back();
    while (true) {
        const double u = uniform01(gen) * total;
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const int id = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                                 std::ssize(cdf_) - 1));
        if (id != exclude) return id;
    }
}

void NegativeSampler::sample_many(std::mt19937_64& gen, int k, int exclude,
                                  std::vector<int>& out) const {
    out.clear();
    for (int i = 0; i < k; ++i) out.push_back(sample(gen, exclude));
}

std::vector<int> sample_negatives(const Vocabulary& vocab, std::mt19937_64& gen, int k,
                                  int exclude, float exponent) {
    NegativeSampler sampler(vocab, exponent);
    std::vector<int> out;
    sampler.sample_many(gen, k, exclude, out);
    return out;
}

float sgns_step(EmbeddingModel& model, int center, int context,
                std::span<const int> negatives, float lr) {
    auto v = model.input_vectors.row(center);
    const int n = static_cast<int>(v.size());

    // Pass 1: scores and loss from the pre-update parameters. Gradients are
    // accumulated first and applied afterwards so that a repeated row (e.g.
    // a negative equal to the context) receives the sum of its contributions,
    // which is the exact gradient of the pairwise loss.
    double loss = 0.0;
    Eigen::RowVectorXf v_grad = Eigen::RowVectorXf::Zero(n);
    thread_local std::vector<float> gs;
    gs.clear();

    auto score_one = [&](int id, float label) {
        auto u = model.output_vectors.row(id);
        const float s = std::clamp(v.dot(u), -kMaxDot, kMaxDot);
        loss += neg_log_sigmoid(label > 0.5f ? s : -s);
        const float g = sigmoid(s) - label;
        v_grad += g * u;
        gs.push_back(g);
    };
    score_one(context, 1.0f);
    for (int neg : negatives) score_one(neg, 0.0f);

    // Pass 2: apply.
    model.output_vectors.row(context) -= (lr * gs[0]) * v;
    for (std::size_t i = 0; i < negatives.size(); ++i)
        model.output_vectors.row(negatives[i]) -= (lr * gs[i + 1]) * v;
    v -= lr * v_grad;

    return static_cast<float>(loss);
}

namespace {

struct LossLogger {
    std::int64_t log_every;
    std::vector<LossRecord> records;
    const ProgressSink* sink = nullptr;
    double accum = 0.0;
    std::int64_t pending = 0;
    std::int64_t seen = 0;

    void add(double loss) {
        accum += loss;
        ++pending;
        ++seen;
        if (pending >= log_every) flush();
    }

    void flush() {
        if (pending == 0) return;
        LossRecord rec{seen, accum / static_cast<double>(pending)};
        records.push_back(rec);
        if (sink && *sink) (*sink)(rec);
        accum = 0.0;
        pending = 0;
    }
};

void check_finite_rows(const EmbeddingModel& model, int center, int context,
                       std::span<const int> negatives, float loss, std::int64_t step) {
    bool ok = std::isfinite(loss) && model.input_vectors.row(center).allFinite() &&
              model.output_vectors.row(context).allFinite();
    for (int neg : negatives)
        ok = ok && model.output_vectors.row(neg).allFinite();
    if (!ok)
        throw NumericalError("non-finite value detected in model at training step " +
                             std::to_string(step));
}

void train_serial(EmbeddingModel& model, const std::vector<TokenSequence>& sequences,
                  std::int64_t total_steps, LossLogger& logger) {
    const TrainingConfig& cfg = model.config;
    NegativeSampler sampler(model.vocabulary, cfg.noise_exponent);
    std::mt19937_64 gen(cfg.seed + 0x5eed);
    std::vector<int> negatives;
    std::int64_t step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const TokenSequence& seq : sequences) {
            for_each_training_pair(seq, cfg.window, [&](int center, int context) {
                sampler.sample_many(gen, cfg.negatives, context, negatives);
                const float lr = lr_at(step, total_steps, cfg);
                const float loss = sgns_step(model, center, context, negatives, lr);
                check_finite_rows(model, center, context, negatives, loss, step);
                logger.add(loss);
                ++step;
            });
        }
    }
}

// Lock-free parallel mode: workers apply unsynchronized sparse updates to the
// shared matrices (determinism is waived; finiteness checks still apply).
void train_parallel(EmbeddingModel& model, const std::vector<TokenSequence>& sequences,
                    std::int64_t total_steps, LossLogger& logger) {
    const TrainingConfig& cfg = model.config;
    NegativeSampler sampler(model.vocabulary, cfg.noise_exponent);
    std::atomic<std::int64_t> global_step{0};
    std::atomic<bool> failed{false};
    std::mutex log_mutex;
    std::exception_ptr first_error;

    auto worker = [&](int worker_id) {
        std::mt19937_64 gen(cfg.seed + 0x9E3779B97F4A7C15ull * (worker_id + 1));
        std::vector<int> negatives;
        try {
            for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
                for (std::size_t s = worker_id; s < sequences.size(); s += cfg.threads) {
                    for_each_training_pair(sequences[s], cfg.window, [&](int center, int context) {
                        if (failed.load(std::memory_order_relaxed)) return;
                        const std::int64_t step = global_step.fetch_add(1);
                        sampler.sample_many(gen, cfg.negatives, context, negatives);
                        const float lr = lr_at(step, total_steps, cfg);
                        const float loss = sgns_step(model, center, context, negatives, lr);
                        check_finite_rows(model, center, context, negatives, loss, step);
                        std::lock_guard lock(log_mutex);
                        logger.add(loss);
                    });
                }
            }
        } catch (...) {
            std::lock_guard lock(log_mutex);
            if (!first_error) first_error = std::current_exception();
            failed.store(true);
        }
    };

    std::vector<std::thread> threads;
    for (int w = 0; w < cfg.threads; ++w) threads.emplace_back(worker, w);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::vector<LossRecord> train(EmbeddingModel& model, const std::vector<TokenSequence>& sequences,
                              const ProgressSink& sink) {
    const TrainingConfig& cfg = model.config;
    for (const TokenSequence& seq : sequences)
        for (int tok : seq.tokens)
            if (tok < 0 || tok >= model.vocabulary.size())
                throw DataError("token id " + std::to_string(tok) +
                                " outside vocabulary of size " +
                                std::to_string(model.vocabulary.size()));

    const std::int64_t pairs_per_epoch = count_training_pairs(sequences, cfg.window);
    const std::int64_t total_steps = pairs_per_epoch * cfg.epochs;

    LossLogger logger{cfg.log_every > 0 ? cfg.log_every : 2000, {}, &sink, 0.0, 0, 0};
    if (total_steps > 0) {
        if (cfg.threads > 1)
            train_parallel(model, sequences, total_steps, logger);
        else
            train_serial(model, sequences, total_steps, logger);
    }
    logger.flush();
    return std::move(logger.records);
}

}  // namespace s2v
