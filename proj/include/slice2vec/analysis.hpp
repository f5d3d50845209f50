#pragma once

#include <string>

#include "slice2vec/midi.hpp"
#include "slice2vec/slicer.hpp"

namespace s2v {

struct ChordLabel {
    int root = 0;               // pitch class 0-11
    Mode quality = Mode::major;
    int match_score = 0;        // matched template tones, 0-3
    bool labeled = false;       // false for empty slices or score 0
};

// Scores all 24 major/minor triad templates by the number of template pitch
// classes present in the slice. Ties go to the template with fewer foreign
// pitch classes, then to the template whose root equals the bass pitch
// class, then to the lower root, then major over minor.
ChordLabel label_chord(const SliceWord& slice);

std::string chord_name(const ChordLabel& label);

// Position of a pitch on the fifth/major-third lattice plus an octave
// component; pitch_of inverts it exactly.
struct TonnetzCoord {
    int fifths = 0;
    int thirds = 0;
    int octaves = 0;

    bool operator==(const TonnetzCoord&) const = default;
};

TonnetzCoord tonnetz_coord(int pitch);
int pitch_of(const TonnetzCoord& coord);

// Minimal number of +-3/+-4/+-7 semitone moves between two absolute MIDI
// pitches (breadth-first search on 0-127, table built once).
int tonnetz_steps(int a, int b);

// Mean tonnetz step count over all cross pairs of the two slices.
double tonnetz_distance(const SliceWord& a, const SliceWord& b);

}  // namespace s2v
