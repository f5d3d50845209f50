#include "slice2vec/analysis.hpp"

#include <array>
#include <cstdlib>
#include <queue>
#include <tuple>

#include "slice2vec/errors.hpp"

namespace s2v {

namespace {

constexpr std::array<const char*, 12> kPitchClassNames = {"C",  "Db", "D",  "Eb", "E",  "F",
                                                          "Gb", "G",  "Ab", "A",  "Bb", "B"};

std::array<bool, 12> pitch_class_set(const SliceWord& slice) {
    std::array<bool, 12> set{};
    for (int p : slice.pitches) set[((p % 12) + 12) % 12] = true;
    return set;
}

}  // namespace

ChordLabel label_chord(const SliceWord& slice) {
    ChordLabel best;
    if (slice.empty()) return best;

    const auto pcs = pitch_class_set(slice);
    int n_pcs = 0;
    for (bool b : pcs) n_pcs += b;
    const int bass_pc = ((slice.pitches.front() % 12) + 12) % 12;

    // higher is better: (score, -extras, root==bass, -root, major)
    auto rank = [&](int score, int extras, int root, Mode quality) {
        return std::make_tuple(score, -extras, root == bass_pc ? 1 : 0, -root,
                               quality == Mode::major ? 1 : 0);
    };
    auto best_rank = rank(-1, 0, 0, Mode::major);

    for (int root = 0; root < 12; ++root) {
        for (Mode quality : {Mode::major, Mode::minor}) {
            const int third = quality == Mode::major ? 4 : 3;
            const std::array<int, 3> tones = {root, (root + third) % 12, (root + 7) % 12};
            int score = 0;
            for (int t : tones) score += pcs[t];
            const int extras = n_pcs - score;
            const auto r = rank(score, extras, root, quality);
            if (r > best_rank) {
                best_rank = r;
                best = ChordLabel{root, quality, score, score > 0};
            }
        }
    }
    return best;
}

std::string chord_name(const ChordLabel& label) {
    if (!label.labeled) return "-";
    return std::string(kPitchClassNames[label.root]) +
           (label.quality == Mode::major ? "" : "m");
}

namespace {

// Canonical lattice coordinates per pitch class: minimal |fifths| + |thirds|,
// ties toward the fifth axis, then toward positive fifths.
std::array<std::pair<int, int>, 12> make_pc_coords() {
    std::array<std::pair<int, int>, 12> coords{};
    for (int pc = 0; pc < 12; ++pc) {
        int best_f = 0, best_t = 0, best_cost = 99;
        for (int f = -6; f <= 6; ++f)
            for (int t = -6; t <= 6; ++t) {
                if (((7 * f + 4 * t) % 12 + 12) % 12 != pc) continue;
                const int cost = std::abs(f) + std::abs(t);
                const auto cand = std::make_tuple(cost, std::abs(t), -f);
                const auto cur = std::make_tuple(best_cost, std::abs(best_t), -best_f);
                if (cand < cur) {
                    best_f = f;
                    best_t = t;
                    best_cost = cost;
                }
            }
        coords[pc] = {best_f, best_t};
    }
    return coords;
}

const std::array<std::pair<int, int>, 12>& pc_coords() {
    static const auto coords = make_pc_coords();
    return coords;
}

// All-pairs step counts on pitches 0-127 with +-3/+-4/+-7 semitone edges.
std::array<std::array<std::int8_t, 128>, 128> make_step_table() {
    std::array<std::array<std::int8_t, 128>, 128> table{};
    constexpr std::array<int, 6> kMoves = {3, -3, 4, -4, 7, -7};
    for (int src = 0; src < 128; ++src) {
        auto& dist = table[src];
        dist.fill(-1);
        dist[src] = 0;
        std::queue<int> frontier;
        frontier.push(src);
        while (!frontier.empty()) {
            const int p = frontier.front();
            frontier.pop();
            for (int m : kMoves) {
                const int q = p + m;
                if (q < 0 || q > 127 || dist[q] >= 0) continue;
                dist[q] = static_cast<std::int8_t>(dist[p] + 1);
                frontier.push(q);
            }
        }
    }
    return table;
}

const std::array<std::array<std::int8_t, 128>, 128>& step_table() {
    static const auto table = make_step_table();
    return table;
}

}  // namespace

TonnetzCoord tonnetz_coord(int pitch) {
    if (pitch < 0 || pitch > 127) throw DataError("pitch out of MIDI range");
    const auto [f, t] = pc_coords()[((pitch % 12) + 12) % 12];
    return TonnetzCoord{f, t, (pitch - 7 * f - 4 * t) / 12};
}

int pitch_of(const TonnetzCoord& coord) {
    return 7 * coord.fifths + 4 * coord.thirds + 12 * coord.octaves;
}

int tonnetz_steps(int a, int b) {
    if (a < 0 || a > 127 || b < 0 || b > 127)
        throw DataError("pitch out of MIDI range");
    return step_table()[a][b];
}

double tonnetz_distance(const SliceWord& a, const SliceWord& b) {
    if (a.empty() || b.empty())
        throw DataError("tonal distance undefined for empty slice");
    std::int64_t total = 0;
    for (int p : a.pitches)
        for (int q : b.pitches) total += tonnetz_steps(p, q);
    return static_cast<double>(total) / (static_cast<double>(a.pitches.size()) *
                                         static_cast<double>(b.pitches.size()));
}

}  // namespace s2v
