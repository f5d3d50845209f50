#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slice2vec/corpus.hpp"

namespace s2v {

struct PieceStats {
    std::string path;
    std::size_t slices = 0;
    std::int64_t slice_ticks = 0;
};

struct CorpusStats {
    std::uint64_t total_tokens = 0;  // T
    std::uint64_t vocab_size = 0;    // V
    std::vector<PieceStats> pieces;
    std::map<std::int64_t, int> slice_ticks_histogram;
};

// Counts tokens and distinct words directly (no Vocabulary involved).
CorpusStats corpus_stats(const Corpus& corpus);

// Entry point behind the binary; returns the process exit code
// (0 ok, 1 usage, 2 data, 3 numerical).
int run(int argc, const char* const* argv);

}  // namespace s2v
