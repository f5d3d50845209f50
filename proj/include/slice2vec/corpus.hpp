#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slice2vec/slicer.hpp"

namespace s2v {

struct CorpusPiece {
    std::string path;
    std::int64_t slice_ticks = 0;
    std::vector<Slice> slices;
};

struct Corpus {
    std::vector<CorpusPiece> pieces;

    std::vector<std::vector<SliceWord>> word_sequences() const;
};

// Line-oriented corpus file: one "#piece <path> <slice_ticks>" header per
// record followed by one line per slice ("60h,64,67", "-" for rests).
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus_file(const Corpus& corpus, const std::string& path);
Corpus read_corpus(std::istream& in);
Corpus read_corpus_file(const std::string& path);

}  // namespace s2v
