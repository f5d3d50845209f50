#include "slice2vec/vocabulary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "slice2vec/errors.hpp"
#include "slice2vec/rng.hpp"

namespace s2v {

Vocabulary::Vocabulary(std::vector<SliceWord> words, std::vector<std::uint64_t> counts)
    : words_(std::move(words)), counts_(std::move(counts)) {
    if (words_.size() != counts_.size())
        throw DataError("vocabulary word/count size mismatch");
    ids_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        auto [it, inserted] = ids_.emplace(words_[i], static_cast<int>(i));
        if (!inserted) throw DataError("duplicate word in vocabulary");
        total_tokens_ += counts_[i];
    }
}

std::optional<int> Vocabulary::id_of(const SliceWord& word) const {
    auto it = ids_.find(word);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::pair<Vocabulary, std::vector<TokenSequence>> build_vocabulary(
    const std::vector<std::vector<SliceWord>>& corpus, std::uint64_t min_count) {
    if (corpus.empty()) throw DataError("cannot build vocabulary from empty corpus");

    struct Entry {
        std::uint64_t count = 0;
        std::size_t first_seen = 0;
    };
    std::unordered_map<SliceWord, Entry, SliceWordHash> seen;
    std::size_t position = 0;
    for (const auto& sequence : corpus)
        for (const SliceWord& word : sequence) {
            auto [it, inserted] = seen.try_emplace(word, Entry{0, position});
            ++it->second.count;
            ++position;
        }

    std::vector<std::pair<SliceWord, Entry>> entries(seen.begin(), seen.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second.count != b.second.count) return a.second.count > b.second.count;
        return a.second.first_seen < b.second.first_seen;
    });

    std::vector<SliceWord> words;
    std::vector<std::uint64_t> counts;
    for (auto& [word, entry] : entries) {
        if (min_count > 0 && entry.count < min_count) continue;
        words.push_back(std::move(word));
        counts.push_back(entry.count);
    }
    Vocabulary vocab(std::move(words), std::move(counts));

    std::vector<TokenSequence> sequences;
    sequences.reserve(corpus.size());
    for (const auto& sequence : corpus) {
        TokenSequence ts;
        ts.tokens.reserve(sequence.size());
        for (const SliceWord& word : sequence)
            if (auto id = vocab.id_of(word)) ts.tokens.push_back(*id);
        sequences.push_back(std::move(ts));
    }
    return {std::move(vocab), std::move(sequences)};
}

std::vector<std::pair<int, int>> training_pairs(const TokenSequence& seq, int window) {
    std::vector<std::pair<int, int>> pairs;
    for_each_training_pair(seq, window,
                           [&](int center, int context) { pairs.emplace_back(center, context); });
    return pairs;
}

std::int64_t count_training_pairs(const std::vector<TokenSequence>& seqs, int window) {
    std::int64_t total = 0;
    for (const TokenSequence& seq : seqs)
        for_each_training_pair(seq, window, [&](int, int) { ++total; });
    return total;
}

std::vector<TokenSequence> subsample_sequences(const std::vector<TokenSequence>& seqs,
                                               const Vocabulary& vocab,
                                               double threshold, std::uint64_t seed) {
    if (threshold <= 0.0) return seqs;
    const double total = static_cast<double>(vocab.total_tokens());
    std::vector<double> keep(vocab.size());
    for (int id = 0; id < vocab.size(); ++id) {
        const double f = static_cast<double>(vocab.count(id)) / total;
        const double r = threshold / f;
        keep[id] = std::min(1.0, (std::sqrt(1.0 / r) + 1.0) * r);
    }
    std::mt19937_64 gen(seed);
    std::vector<TokenSequence> out;
    out.reserve(seqs.size());
    for (const TokenSequence& seq : seqs) {
        TokenSequence kept;
        for (int id : seq.tokens)
            if (uniform01(gen) < keep[static_cast<std::size_t>(id)])
                kept.tokens.push_back(id);
        out.push_back(std::move(kept));
    }
    return out;
}

}  // namespace s2v
