#include "slice2vec/slicer.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "slice2vec/errors.hpp"

namespace s2v {

std::int64_t compute_slice_duration(const Piece& piece, double threshold) {
    std::vector<std::int64_t> onsets;
    onsets.reserve(piece.events.size());
    for (const NoteEvent& e : piece.events) onsets.push_back(e.onset);
    std::sort(onsets.begin(), onsets.end());
    onsets.erase(std::unique(onsets.begin(), onsets.end()), onsets.end());
    if (onsets.size() < 2)
        throw DataError("cannot infer slice size: fewer than 2 distinct onsets in " +
                        (piece.source_path.empty() ? std::string("piece") : piece.source_path));

    std::map<std::int64_t, std::int64_t> ioi_count;
    for (std::size_t i = 1; i < onsets.size(); ++i) ++ioi_count[onsets[i] - onsets[i - 1]];
    const double total = static_cast<double>(onsets.size() - 1);

    // map iteration is ascending, so the first qualifying interval is the smallest
    for (const auto& [ioi, count] : ioi_count)
        if (static_cast<double>(count) / total > threshold) return ioi;

    // fallback: modal interval, smallest on ties
    std::int64_t best = 0, best_count = -1;
    for (const auto& [ioi, count] : ioi_count)
        if (count > best_count) {
            best = ioi;
            best_count = count;
        }
    return best;
}

std::vector<Slice> slice_piece(const Piece& piece, std::int64_t slice_ticks) {
    if (slice_ticks < 1) throw DataError("slice duration must be positive");
    std::vector<Slice> slices;
    if (piece.events.empty()) return slices;

    std::int64_t last_end = 0;
    for (const NoteEvent& e : piece.events)
        last_end = std::max(last_end, e.onset + e.duration);
    const std::int64_t n_windows = (last_end + slice_ticks - 1) / slice_ticks;

    slices.resize(static_cast<std::size_t>(n_windows));
    for (std::int64_t k = 0; k < n_windows; ++k) {
        slices[k].start_tick = k * slice_ticks;
        slices[k].end_tick = (k + 1) * slice_ticks;
    }

    // pitch -> (sounds in window, has an onset in window)
    std::vector<std::map<int, std::pair<bool, bool>>> window_pitches(slices.size());
    for (const NoteEvent& e : piece.events) {
        const std::int64_t first = e.onset / slice_ticks;
        const std::int64_t last = (e.onset + e.duration - 1) / slice_ticks;
        for (std::int64_t k = first; k <= last; ++k) {
            auto& entry = window_pitches[k][e.pitch];
            entry.first = true;
            if (e.onset >= slices[k].start_tick) entry.second = true;
        }
    }

    for (std::size_t k = 0; k < slices.size(); ++k) {
        for (const auto& [pitch, flags] : window_pitches[k]) {
            slices[k].word.pitches.push_back(pitch);
            slices[k].held.push_back(!flags.second);
        }
    }
    return slices;
}

std::string format_word(const SliceWord& word) {
    if (word.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < word.pitches.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(word.pitches[i]);
    }
    return out;
}

std::string format_slice(const Slice& slice) {
    if (slice.word.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < slice.word.pitches.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(slice.word.pitches[i]);
        if (slice.held[i]) out += 'h';
    }
    return out;
}

namespace {

void append_pitch(std::vector<int>& pitches, std::vector<bool>* held, const std::string& tok) {
    std::string t = tok;
    bool is_held = false;
    if (!t.empty() && t.back() == 'h') {
        is_held = true;
        t.pop_back();
    }
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw DataError("malformed pitch token '" + tok + "'");
    int p = std::stoi(t);
    if (p < 0 || p > 127) throw DataError("pitch out of range: " + t);
    if (!pitches.empty() && p <= pitches.back())
        throw DataError("pitches not strictly ascending near '" + tok + "'");
    pitches.push_back(p);
    if (held) held->push_back(is_held);
}

void parse_tokens(const std::string& text, std::vector<int>& pitches, std::vector<bool>* held) {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) append_pitch(pitches, held, tok);
}

}  // namespace

SliceWord parse_word(const std::string& text) {
    SliceWord w;
    if (text == "-" || text.empty()) return w;
    parse_tokens(text, w.pitches, nullptr);
    return w;
}

Slice parse_slice_line(const std::string& line) {
    Slice s;
    if (line == "-" || line.empty()) return s;
    parse_tokens(line, s.word.pitches, &s.held);
    return s;
}

}  // namespace s2v
