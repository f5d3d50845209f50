#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slice2vec/midi.hpp"

namespace s2v {

// The "word" of the model: the set of sounding pitches in one time window,
// register preserved (C4 and C5 are different pitches). May be empty (rest).
struct SliceWord {
    std::vector<int> pitches;  // strictly ascending, no duplicates

    auto operator<=>(const SliceWord&) const = default;
    bool empty() const { return pitches.empty(); }
};

struct SliceWordHash {
    std::size_t operator()(const SliceWord& w) const {
        std::size_t h = 1469598103934665603ull;  // FNV-1a
        for (int p : w.pitches) {
            h ^= static_cast<std::size_t>(p);
            h *= 1099511628211ull;
        }
        return h;
    }
};

struct Slice {
    SliceWord word;
    std::vector<bool> held;  // parallel to word.pitches; true = onset precedes the slice
    std::int64_t start_tick = 0;
    std::int64_t end_tick = 0;

    bool operator==(const Slice&) const = default;
};

// Smallest inter-onset interval whose share of all consecutive distinct-onset
// differences exceeds `threshold`; falls back to the modal interval when none
// qualifies. Needs at least two distinct onset times.
std::int64_t compute_slice_duration(const Piece& piece, double threshold = 0.05);

// Cuts [0, last note end) into windows of slice_ticks. A pitch belongs to a
// window iff its sounding interval intersects it; it is held iff every such
// note of that pitch started before the window.
std::vector<Slice> slice_piece(const Piece& piece, std::int64_t slice_ticks);

// Text forms used by the corpus file and the CLI: "60h,64,67", "-" for rests.
std::string format_word(const SliceWord& word);
std::string format_slice(const Slice& slice);
SliceWord parse_word(const std::string& text);
Slice parse_slice_line(const std::string& line);

}  // namespace s2v
