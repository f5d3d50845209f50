#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slice2vec/embedding.hpp"
#include "slice2vec/slicer.hpp"

namespace s2v {

struct Replacement {
    int position = 0;
    SliceWord original;
    SliceWord replacement;
    double cosine = 0.0;
    std::optional<double> tonnetz;   // empty when the replacement slice is a rest
    std::vector<int> held_conflicts; // held pitches whose onset chain the replacement broke
};

struct ReplacementReport {
    std::vector<Replacement> rows;
    std::vector<int> skipped_empty;  // requested positions that were rests
};

// Swaps each targeted slice for its highest-cosine vocabulary neighbor
// (excluding itself). Held flags carry over by pitch identity; a held pitch
// with no occurrence of that pitch in the preceding slice is reported as a
// conflict, as is a following slice's held pitch the replacement no longer
// sustains.
std::pair<std::vector<Slice>, ReplacementReport> replace_slices(
    const std::vector<Slice>& score, const EmbeddingModel& model,
    const std::vector<int>& positions);

// Renders a slice sequence to a format-0 SMF. Runs of the same pitch whose
// later slices carry the held flag merge into one sustained note; every
// other appearance is a one-window note.
std::vector<std::uint8_t> render_midi(const std::vector<Slice>& score,
                                      std::int64_t slice_ticks, int ticks_per_quarter);

void render_midi_file(const std::vector<Slice>& score, std::int64_t slice_ticks,
                      int ticks_per_quarter, const std::string& path);

}  // namespace s2v
