#include "slice2vec/remix.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "slice2vec/analysis.hpp"
#include "slice2vec/errors.hpp"

namespace s2v {

namespace {

std::set<int> held_pitches(const Slice& slice) {
    std::set<int> out;
    for (std::size_t i = 0; i < slice.word.pitches.size(); ++i)
        if (slice.held[i]) out.insert(slice.word.pitches[i]);
    return out;
}

bool contains_pitch(const Slice& slice, int pitch) {
    return std::binary_search(slice.word.pitches.begin(), slice.word.pitches.end(), pitch);
}

}  // namespace

std::pair<std::vector<Slice>, ReplacementReport> replace_slices(
    const std::vector<Slice>& score, const EmbeddingModel& model,
    const std::vector<int>& positions) {
    std::vector<int> targets = positions;
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (int p : targets)
        if (p < 0 || p >= std::ssize(score))
            throw DataError("replacement position " + std::to_string(p) +
                            " outside score of " + std::to_string(score.size()) + " slices");

    std::vector<Slice> modified = score;
    ReplacementReport report;

    for (int pos : targets) {
        const Slice& original = score[pos];
        if (original.word.empty()) {
            report.skipped_empty.push_back(pos);
            continue;
        }
        const auto id = model.vocabulary.id_of(original.word);
        if (!id)
            throw DataError("slice at position " + std::to_string(pos) + " (" +
                            format_word(original.word) + ") is not in the model vocabulary");
        const auto neighbors = nearest_neighbors(model, *id, 1, /*exclude_self=*/true);
        if (neighbors.empty())
            throw DataError("no usable neighbor for position " + std::to_string(pos));

        Replacement row;
        row.position = pos;
        row.original = original.word;
        row.replacement = neighbors.front().word;
        row.cosine = neighbors.front().score;
        if (!row.replacement.empty())
            row.tonnetz = tonnetz_distance(original.word, row.replacement);

        Slice& slot = modified[pos];
        const auto was_held = held_pitches(original);
        slot.word = row.replacement;
        slot.held.assign(slot.word.pitches.size(), false);
        for (std::size_t i = 0; i < slot.word.pitches.size(); ++i)
            if (was_held.count(slot.word.pitches[i])) slot.held[i] = true;

        report.rows.push_back(std::move(row));
    }

    // Conflicts are found against the fully modified score: a held pitch
    // whose previous slice no longer contains it, and the next slice's held
    // pitches this replacement stopped sustaining.
    for (Replacement& row : report.rows) {
        const int pos = row.position;
        std::set<int> conflicts;
        for (int q : held_pitches(modified[pos]))
            if (pos == 0 || !contains_pitch(modified[pos - 1], q)) conflicts.insert(q);
        if (pos + 1 < std::ssize(modified))
            for (int q : held_pitches(modified[pos + 1]))
                if (!contains_pitch(modified[pos], q)) conflicts.insert(q);
        row.held_conflicts.assign(conflicts.begin(), conflicts.end());
    }
    return {std::move(modified), std::move(report)};
}

namespace {

struct MidiEvent {
    std::int64_t tick;
    bool is_on;
    int pitch;
};

void write_vlq(std::vector<std::uint8_t>& out, std::int64_t value) {
    std::uint8_t stack[5];
    int n = 0;
    do {
        stack[n++] = static_cast<std::uint8_t>(value & 0x7F);
        value >>= 7;
    } while (value > 0);
    while (n > 1) out.push_back(stack[--n] | 0x80);
    out.push_back(stack[0]);
}

void push_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(v >> 24);
    out.push_back((v >> 16) & 0xFF);
    out.push_back((v >> 8) & 0xFF);
    out.push_back(v & 0xFF);
}

}  // namespace

std::vector<std::uint8_t> render_midi(const std::vector<Slice>& score,
                                      std::int64_t slice_ticks, int ticks_per_quarter) {
    if (slice_ticks < 1) throw DataError("slice duration must be positive");
    if (ticks_per_quarter < 1 || ticks_per_quarter > 0x7FFF)
        throw DataError("ticks_per_quarter out of range");

    // Build sustained notes: pitch -> onset of the currently sounding note.
    std::vector<MidiEvent> events;
    std::map<int, std::int64_t> active;
    std::int64_t end_tick = 0;
    for (std::size_t k = 0; k < score.size(); ++k) {
        const Slice& slice = score[k];
        const std::int64_t start = static_cast<std::int64_t>(k) * slice_ticks;
        end_tick = start + slice_ticks;
        std::map<int, std::int64_t> next_active;
        for (std::size_t i = 0; i < slice.word.pitches.size(); ++i) {
            const int p = slice.word.pitches[i];
            const auto it = active.find(p);
            if (slice.held[i] && it != active.end()) {
                next_active[p] = it->second;  // sustain continues
                active.erase(it);
            } else {
                if (it != active.end()) {  // re-articulated: close, reopen
                    events.push_back({start, false, p});
                    active.erase(it);
                }
                events.push_back({start, true, p});
                next_active[p] = start;
            }
        }
        for (const auto& [p, onset] : active) events.push_back({start, false, p});
        active = std::move(next_active);
    }
    for (const auto& [p, onset] : active) events.push_back({end_tick, false, p});

    std::stable_sort(events.begin(), events.end(), [](const MidiEvent& a, const MidiEvent& b) {
        if (a.tick != b.tick) return a.tick < b.tick;
        if (a.is_on != b.is_on) return !a.is_on;  // offs first
        return a.pitch < b.pitch;
    });

    std::vector<std::uint8_t> track;
    std::int64_t cursor = 0;
    for (const MidiEvent& e : events) {
        write_vlq(track, e.tick - cursor);
        cursor = e.tick;
        track.push_back(e.is_on ? 0x90 : 0x80);
        track.push_back(static_cast<std::uint8_t>(e.pitch));
        track.push_back(e.is_on ? 80 : 0);
    }
    // end of track
    write_vlq(track, 0);
    track.push_back(0xFF);
    track.push_back(0x2F);
    track.push_back(0x00);

    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'M', 'T', 'h', 'd'});
    push_u32_be(out, 6);
    out.insert(out.end(), {0, 0, 0, 1});  // format 0, one track
    out.push_back(static_cast<std::uint8_t>(ticks_per_quarter >> 8));
    out.push_back(static_cast<std::uint8_t>(ticks_per_quarter & 0xFF));
    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    push_u32_be(out, static_cast<std::uint32_t>(track.size()));
    out.insert(out.end(), track.begin(), track.end());
    return out;
}

void render_midi_file(const std::vector<Slice>& score, std::int64_t slice_ticks,
                      int ticks_per_quarter, const std::string& path) {
    const auto bytes = render_midi(score, slice_ticks, ticks_per_quarter);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write MIDI file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failure: " + path);
}

}  // namespace s2v
