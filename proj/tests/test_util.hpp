#pragma once

// Shared helpers for the test binaries: an independent little SMF byte
// builder (so parser tests do not depend on the library's own renderer)
// and an exception matcher that checks the message substring.

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <doctest.h>

#include "slice2vec/midi.hpp"

namespace testutil {

using Bytes = std::vector<std::uint8_t>;

template <typename Error, typename Fn>
void expect_error(Fn&& fn, const std::string& substring) {
    try {
        fn();
        FAIL_CHECK("expected an exception mentioning '" << substring << "'");
    } catch (const Error& e) {
        std::string msg = e.what();
        INFO("actual message: " << msg);
        CHECK(msg.find(substring) != std::string::npos);
    }
}

inline void put_u16(Bytes& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(Bytes& b, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_vlq(Bytes& b, std::uint32_t v) {
    std::uint8_t stack[5];
    int n = 0;
    stack[n++] = v & 0x7F;
    v >>= 7;
    while (v) {
        stack[n++] = 0x80 | (v & 0x7F);
        v >>= 7;
    }
    while (n) b.push_back(stack[--n]);
}

// Accumulates raw track events; finish() wraps them in an MTrk chunk with an
// end-of-track meta appended.
struct TrackBuilder {
    Bytes data;
    std::int64_t eot_delta = 0;

    TrackBuilder& event(std::uint32_t delta, std::initializer_list<std::uint8_t> bytes) {
        put_vlq(data, delta);
        data.insert(data.end(), bytes.begin(), bytes.end());
        return *this;
    }
    TrackBuilder& raw(std::initializer_list<std::uint8_t> bytes) {
        data.insert(data.end(), bytes.begin(), bytes.end());
        return *this;
    }
    TrackBuilder& note_on(std::uint32_t delta, int pitch, int velocity = 80, int channel = 0) {
        return event(delta, {static_cast<std::uint8_t>(0x90 | channel),
                             static_cast<std::uint8_t>(pitch),
                             static_cast<std::uint8_t>(velocity)});
    }
    TrackBuilder& note_off(std::uint32_t delta, int pitch, int channel = 0) {
        return event(delta, {static_cast<std::uint8_t>(0x80 | channel),
                             static_cast<std::uint8_t>(pitch), 0});
    }

    Bytes finish() const {
        Bytes body = data;
        put_vlq(body, static_cast<std::uint32_t>(eot_delta));
        body.push_back(0xFF);
        body.push_back(0x2F);
        body.push_back(0x00);
        Bytes out;
        out.push_back('M');
        out.push_back('T');
        out.push_back('r');
        out.push_back('k');
        put_u32(out, static_cast<std::uint32_t>(body.size()));
        out.insert(out.end(), body.begin(), body.end());
        return out;
    }
};

// ntrks -1 means "one per chunk"; pass it explicitly when a chunk is not
// an MTrk (alien chunks do not count as tracks).
inline Bytes make_smf(int format, int tpq, const std::vector<Bytes>& chunks,
                      int ntrks = -1) {
    Bytes out;
    out.push_back('M');
    out.push_back('T');
    out.push_back('h');
    out.push_back('d');
    put_u32(out, 6);
    put_u16(out, static_cast<std::uint16_t>(format));
    put_u16(out, static_cast<std::uint16_t>(ntrks < 0 ? chunks.size() : ntrks));
    put_u16(out, static_cast<std::uint16_t>(tpq));
    for (const Bytes& c : chunks) out.insert(out.end(), c.begin(), c.end());
    return out;
}

struct NoteSpec {
    int pitch;
    std::int64_t onset;
    std::int64_t duration;
};

// In-memory piece for modules downstream of the parser.
inline s2v::Piece make_piece(const std::vector<NoteSpec>& notes, int tpq = 480) {
    s2v::Piece p;
    p.ticks_per_quarter = tpq;
    for (const auto& n : notes) p.events.push_back({n.pitch, n.onset, n.duration, 80, 0});
    return p;
}

inline void write_file(const std::string& path, const Bytes& bytes) {
    std::ofstream f(path, std::ios::binary);
    REQUIRE(f.good());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    REQUIRE(f.good());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace testutil
