#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace s2v {

enum class Mode { major, minor };

struct Key {
    int tonic = 0;  // pitch class 0-11
    Mode mode = Mode::major;

    bool operator==(const Key&) const = default;
};

// "C", "Db", ... "Bb", "B" for pitch classes 0-11.
std::string pitch_class_name(int pc);

std::string key_name(const Key& key);

// Parses "0:major", "c:major", "Eb:minor" etc.
Key parse_key(const std::string& text);

struct NoteEvent {
    int pitch = 0;               // MIDI pitch 0-127
    std::int64_t onset = 0;      // ticks, >= 0
    std::int64_t duration = 1;   // ticks, >= 1
    int velocity = 64;
    int track = 0;

    bool operator==(const NoteEvent&) const = default;
};

struct Piece {
    std::vector<NoteEvent> events;  // sorted by (onset, pitch)
    int ticks_per_quarter = 480;
    std::optional<Key> detected_key;
    std::optional<Key> key_signature;  // from a key-signature meta event, if any
    std::string source_path;
    bool had_dangling_note = false;  // note-on without matching note-off
};

// Standard MIDI File, formats 0 and 1. Note-on with velocity 0 counts as
// note-off; overlapping same-pitch notes are closed FIFO by the earliest
// matching note-off. Dangling note-ons are closed at end of track and
// flagged. Malformed input raises DataError naming the byte offset.
Piece parse_midi(std::span<const std::uint8_t> bytes, std::string source_path = "");

Piece parse_midi_file(const std::string& path);

// Krumhansl-Schmuckler estimate over all 24 keys (Pearson correlation of the
// duration-weighted pitch-class distribution against the Krumhansl-Kessler
// profiles). A key-signature meta event in the piece overrides the estimate.
Key detect_key(const Piece& piece);

// Shifts every pitch by the smallest-magnitude semitone offset taking the
// detected tonic to C (major) or A (minor); a +-6 tie resolves to -6.
// Pitches pushed outside 0-127 are pulled back by octaves individually.
Piece transpose_to_reference(const Piece& piece);

}  // namespace s2v
