#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slice2vec/slicer.hpp"

namespace s2v {

// Bijection between distinct SliceWords and dense token ids. Ids are
// assigned in descending corpus-count order, ties by first appearance.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<SliceWord> words, std::vector<std::uint64_t> counts);

    int size() const { return static_cast<int>(words_.size()); }
    std::uint64_t total_tokens() const { return total_tokens_; }

    const SliceWord& word(int id) const { return words_.at(id); }
    std::uint64_t count(int id) const { return counts_.at(id); }
    std::optional<int> id_of(const SliceWord& word) const;

    const std::vector<SliceWord>& words() const { return words_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

private:
    std::vector<SliceWord> words_;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<SliceWord, int, SliceWordHash> ids_;
    std::uint64_t total_tokens_ = 0;
};

struct TokenSequence {
    std::vector<int> tokens;
};

std::pair<Vocabulary, std::vector<TokenSequence>> build_vocabulary(
    const std::vector<std::vector<SliceWord>>& corpus, std::uint64_t min_count = 0);

// Skip-gram pairs (center, context) for |i| <= window, in ascending position
// order then ascending offset. Windows never cross sequence boundaries.
template <typename Fn>
void for_each_training_pair(const TokenSequence& seq, int window, Fn&& fn) {
    const auto n = static_cast<std::int64_t>(seq.tokens.size());
    for (std::int64_t t = 0; t < n; ++t)
        for (std::int64_t i = -window; i <= window; ++i) {
            if (i == 0) continue;
            const std::int64_t u = t + i;
            if (u < 0 || u >= n) continue;
            fn(seq.tokens[t], seq.tokens[u]);
        }
}

std::vector<std::pair<int, int>> training_pairs(const TokenSequence& seq, int window);

std::int64_t count_training_pairs(const std::vector<TokenSequence>& seqs, int window);

// Randomly discards frequent tokens: token w survives with probability
// min(1, (sqrt(f/t) + 1) * (t/f)) where f is w's corpus frequency ratio.
// threshold <= 0 disables; deterministic for a fixed seed.
std::vector<TokenSequence> subsample_sequences(const std::vector<TokenSequence>& seqs,
                                               const Vocabulary& vocab,
                                               double threshold, std::uint64_t seed);

}  // namespace s2v
