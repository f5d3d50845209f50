#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "slice2vec/errors.hpp"
#include "slice2vec/slicer.hpp"
#include "test_util.hpp"

using namespace s2v;
using namespace testutil;

// ----------------------------------------------------------- slice duration

TEST_CASE("smallest sufficiently common inter-onset interval wins") {
    // 4% of intervals are 120 ticks, 50% are 240, 46% are 480: the 120s are
    // too rare, so 240 is the smallest interval clearing the 5% bar.
    std::vector<NoteSpec> notes;
    std::int64_t t = 0;
    auto push = [&](std::int64_t ioi, int times) {
        for (int i = 0; i < times; ++i) {
            t += ioi;
            notes.push_back({60, t, 10});
        }
    };
    notes.push_back({60, 0, 10});
    push(120, 4);
    push(240, 50);
    push(480, 46);
    Piece p = make_piece(notes);
    CHECK(compute_slice_duration(p) == 240);
    // A looser threshold lets the 4% interval qualify.
    CHECK(compute_slice_duration(p, 0.03) == 120);
}

TEST_CASE("the share must strictly exceed the threshold") {
    std::vector<NoteSpec> notes{{60, 0, 10}};
    std::int64_t t = 0;
    for (int i = 0; i < 5; ++i) notes.push_back({60, t += 120, 10});
    for (int i = 0; i < 95; ++i) notes.push_back({60, t += 240, 10});
    Piece p = make_piece(notes);
    CHECK(compute_slice_duration(p, 0.05) == 240);  // 5/100 == 5% is not enough
    CHECK(compute_slice_duration(p, 0.049) == 120);
}

TEST_CASE("chord notes share one onset") {
    // Three-note chords at 0 and 480: a single 480-tick interval.
    Piece p = make_piece({{60, 0, 100}, {64, 0, 100}, {67, 0, 100}, {62, 480, 100}});
    CHECK(compute_slice_duration(p) == 480);
}

TEST_CASE("modal fallback when nothing clears the threshold") {
    SUBCASE("all intervals unique picks the smallest") {
        std::vector<NoteSpec> notes{{60, 0, 5}};
        std::int64_t t = 0;
        for (std::int64_t ioi = 100; ioi <= 120; ++ioi) notes.push_back({60, t += ioi, 5});
        // 21 intervals, each 1/21 < 5%
        CHECK(compute_slice_duration(make_piece(notes)) == 100);
    }
    SUBCASE("modal interval beats smaller rare ones") {
        std::vector<NoteSpec> notes{{60, 0, 5}};
        std::int64_t t = 0;
        notes.push_back({60, t += 50, 5});
        notes.push_back({60, t += 100, 5});
        notes.push_back({60, t += 100, 5});
        notes.push_back({60, t += 200, 5});
        // shares: 50 -> 25%, 100 -> 50%, 200 -> 25%; threshold 0.6 disables all
        CHECK(compute_slice_duration(make_piece(notes), 0.6) == 100);
    }
}

TEST_CASE("slice duration needs two distinct onsets") {
    expect_error<DataError>([] { compute_slice_duration(Piece{}); }, "fewer than 2 distinct onsets");
    expect_error<DataError>(
        [] { compute_slice_duration(make_piece({{60, 0, 100}})); },
        "fewer than 2 distinct onsets");
    expect_error<DataError>(
        [] { compute_slice_duration(make_piece({{60, 0, 100}, {64, 0, 50}})); },
        "fewer than 2 distinct onsets");
    Piece named = make_piece({{60, 0, 100}});
    named.source_path = "x.mid";
    expect_error<DataError>([&] { compute_slice_duration(named); }, "x.mid");
}

// ----------------------------------------------------------------- slicing

TEST_CASE("hand-worked slicing example") {
    Piece p = make_piece({{60, 0, 480}, {64, 0, 240}, {67, 240, 240}, {69, 460, 60}});
    auto slices = slice_piece(p, 240);
    REQUIRE(slices.size() == 3);  // last end 520 -> ceil(520/240)

    CHECK(slices[0].word.pitches == std::vector<int>{60, 64});
    CHECK(slices[0].held == std::vector<bool>{false, false});
    CHECK(slices[0].start_tick == 0);
    CHECK(slices[0].end_tick == 240);

    CHECK(slices[1].word.pitches == std::vector<int>{60, 67, 69});
    CHECK(slices[1].held == std::vector<bool>{true, false, false});

    CHECK(slices[2].word.pitches == std::vector<int>{69});
    CHECK(slices[2].held == std::vector<bool>{true});
    CHECK(slices[2].end_tick == 720);
}

TEST_CASE("gaps become rest slices") {
    Piece p = make_piece({{60, 0, 100}, {62, 500, 100}});
    auto slices = slice_piece(p, 100);
    REQUIRE(slices.size() == 6);
    CHECK(format_slice(slices[0]) == "60");
    for (int k = 1; k <= 4; ++k) CHECK(slices[k].word.empty());
    CHECK(format_slice(slices[5]) == "62");
}

TEST_CASE("re-struck pitch is not held") {
    // 60 sounds across both windows and is struck again in the second.
    Piece p = make_piece({{60, 0, 200}, {60, 150, 100}});
    auto slices = slice_piece(p, 100);
    REQUIRE(slices.size() == 3);
    CHECK(slices[1].word.pitches == std::vector<int>{60});
    CHECK(slices[1].held == std::vector<bool>{false});  // onset at 150 in window
    CHECK(slices[2].held == std::vector<bool>{true});
}

TEST_CASE("empty piece yields no slices and bad duration throws") {
    CHECK(slice_piece(Piece{}, 240).empty());
    expect_error<DataError>([] { slice_piece(make_piece({{60, 0, 10}}), 0); },
                            "slice duration must be positive");
}

namespace {

// Brute-force per-tick oracle: a pitch is in a window iff it sounds at any
// tick of the window; held iff additionally no note of that pitch starts
// inside the window.
std::vector<Slice> oracle_slices(const Piece& piece, std::int64_t d) {
    std::int64_t last_end = 0;
    for (const auto& e : piece.events) last_end = std::max(last_end, e.onset + e.duration);
    std::vector<Slice> out;
    for (std::int64_t ws = 0; ws < last_end; ws += d) {
        Slice s;
        s.start_tick = ws;
        s.end_tick = ws + d;
        std::set<int> sounding, onsets;
        for (const auto& e : piece.events) {
            for (std::int64_t t = ws; t < ws + d; ++t)
                if (e.onset <= t && t < e.onset + e.duration) sounding.insert(e.pitch);
            if (ws <= e.onset && e.onset < ws + d) onsets.insert(e.pitch);
        }
        for (int pitch : sounding) {
            s.word.pitches.push_back(pitch);
            s.held.push_back(!onsets.count(pitch));
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_CASE("slicing matches the per-tick oracle on random pieces") {
    std::mt19937 gen(20240817);
    for (int round = 0; round < 200; ++round) {
        CAPTURE(round);
        std::uniform_int_distribution<int> n_notes(1, 20), pitch(30, 100);
        std::uniform_int_distribution<std::int64_t> onset(0, 800), dur(1, 300), ticks(1, 250);
        Piece p;
        const int n = n_notes(gen);
        for (int i = 0; i < n; ++i)
            p.events.push_back({pitch(gen), onset(gen), dur(gen), 80, 0});
        const std::int64_t d = ticks(gen);

        auto got = slice_piece(p, d);
        auto want = oracle_slices(p, d);
        REQUIRE(got.size() == want.size());
        for (std::size_t k = 0; k < got.size(); ++k) {
            CAPTURE(k);
            CHECK(got[k] == want[k]);
        }
    }
}

TEST_CASE("windows tile the piece exactly") {
    std::mt19937 gen(99);
    std::uniform_int_distribution<int> pitch(30, 100);
    std::uniform_int_distribution<std::int64_t> onset(0, 3000), dur(1, 500);
    Piece p;
    for (int i = 0; i < 30; ++i) p.events.push_back({pitch(gen), onset(gen), dur(gen), 80, 0});
    std::int64_t last_end = 0;
    for (const auto& e : p.events) last_end = std::max(last_end, e.onset + e.duration);

    for (std::int64_t d : {7, 100, 240, 5000}) {
        auto slices = slice_piece(p, d);
        CHECK(static_cast<std::int64_t>(slices.size()) == (last_end + d - 1) / d);
        for (std::size_t k = 0; k < slices.size(); ++k) {
            CHECK(slices[k].start_tick == static_cast<std::int64_t>(k) * d);
            CHECK(slices[k].end_tick == slices[k].start_tick + d);
            // ascending unique pitches, parallel held flags
            CHECK(slices[k].held.size() == slices[k].word.pitches.size());
            for (std::size_t i = 1; i < slices[k].word.pitches.size(); ++i)
                CHECK(slices[k].word.pitches[i - 1] < slices[k].word.pitches[i]);
        }
        CHECK(slices.back().start_tick < last_end);
    }
}

// ------------------------------------------------------------- text round trip

TEST_CASE("word and slice text forms round-trip") {
    Slice s;
    s.word.pitches = {60, 64, 67};
    s.held = {true, false, true};
    CHECK(format_slice(s) == "60h,64,67h");
    Slice back = parse_slice_line("60h,64,67h");
    CHECK(back.word == s.word);
    CHECK(back.held == s.held);

    CHECK(format_word(SliceWord{{60, 64, 67}}) == "60,64,67");
    CHECK(parse_word("60,64,67") == SliceWord{{60, 64, 67}});
    CHECK(format_word(SliceWord{}) == "-");
    CHECK(parse_word("-") == SliceWord{});
    CHECK(format_slice(Slice{}) == "-");
    // held markers are tolerated (and dropped) when parsing a bare word
    CHECK(parse_word("60h,64") == SliceWord{{60, 64}});
}

TEST_CASE("random slices survive the text round trip") {
    std::mt19937 gen(4242);
    std::uniform_int_distribution<int> count(0, 8), pitch(0, 127), coin(0, 1);
    for (int round = 0; round < 100; ++round) {
        std::set<int> ps;
        const int n = count(gen);
        while (static_cast<int>(ps.size()) < n) ps.insert(pitch(gen));
        Slice s;
        for (int p : ps) {
            s.word.pitches.push_back(p);
            s.held.push_back(coin(gen) == 1);
        }
        Slice back = parse_slice_line(format_slice(s));
        CHECK(back.word == s.word);
        CHECK(back.held == s.held);
    }
}

TEST_CASE("malformed slice text is rejected") {
    expect_error<DataError>([] { parse_word("60,abc"); }, "malformed pitch token 'abc'");
    expect_error<DataError>([] { parse_word("60,,64"); }, "malformed pitch token");
    expect_error<DataError>([] { parse_word("200"); }, "pitch out of range");
    expect_error<DataError>([] { parse_word("64,60"); }, "not strictly ascending");
    expect_error<DataError>([] { parse_word("60,60"); }, "not strictly ascending");
    expect_error<DataError>([] { parse_slice_line("60hh"); }, "malformed pitch token");
    expect_error<DataError>([] { parse_word("-5"); }, "malformed pitch token");
}
