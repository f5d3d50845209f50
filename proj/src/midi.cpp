#include "slice2vec/midi.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

#include "slice2vec/errors.hpp"

namespace s2v {

namespace {

std::string at_offset(std::size_t off) {
    return " at byte offset " + std::to_string(off);
}

// Big-endian reader over the raw file with offset-aware errors.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint16_t u16() {
        need(2);
        std::uint16_t v = (std::uint16_t(bytes_[pos_]) << 8) | bytes_[pos_ + 1];
        pos_ += 2;
        return v;
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }

    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }

    // Variable-length quantity, at most 4 bytes per the SMF spec.
    std::uint32_t vlq() {
        std::uint32_t value = 0;
        for (int i = 0; i < 4; ++i) {
            std::uint8_t b = u8();
            value = (value << 7) | (b & 0x7F);
            if ((b & 0x80) == 0) return value;
        }
        throw DataError("variable-length quantity longer than 4 bytes" + at_offset(pos_));
    }

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n)
            throw DataError("unexpected end of MIDI data" + at_offset(bytes_.size()));
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

Key key_from_signature(int sharps, bool minor) {
    // sf sharps move the tonic up a fifth each; the relative minor sits
    // three semitones below the major tonic.
    int tonic = ((sharps * 7) % 12 + 12) % 12;
    if (minor) tonic = (tonic + 9) % 12;
    return Key{tonic, minor ? Mode::minor : Mode::major};
}

struct OpenNote {
    std::int64_t onset;
    int velocity;
};

void parse_track(ByteReader& r, std::size_t track_len, int track_index, Piece& out) {
    std::size_t track_end = r.offset() + track_len;
    std::int64_t tick = 0;
    std::uint8_t running_status = 0;
    // FIFO of open notes per (channel, pitch); a note-off closes the earliest.
    std::map<std::pair<int, int>, std::deque<OpenNote>> open;

    auto close_note = [&](int channel, int pitch, std::int64_t off_tick) {
        auto it = open.find({channel, pitch});
        if (it == open.end() || it->second.empty()) return false;
        OpenNote on = it->second.front();
        it->second.pop_front();
        out.events.push_back(NoteEvent{pitch, on.onset,
                                       std::max<std::int64_t>(1, off_tick - on.onset),
                                       on.velocity, track_index});
        return true;
    };

    bool end_of_track = false;
    while (!end_of_track && r.offset() < track_end) {
        tick += r.vlq();
        std::uint8_t first = r.u8();
        std::uint8_t status;
        std::uint8_t pending = 0;
        bool has_pending = false;
        if (first & 0x80) {
            status = first;
            if (status < 0xF0) running_status = status;
        } else {
            if (running_status == 0)
                throw DataError("data byte without running status" + at_offset(r.offset() - 1));
            status = running_status;
            pending = first;
            has_pending = true;
        }

        auto next_data = [&]() -> std::uint8_t {
            if (has_pending) {
                has_pending = false;
                return pending;
            }
            return r.u8();
        };

        switch (status & 0xF0) {
            case 0x80: {  // note off
                int pitch = next_data() & 0x7F;
                r.u8();  // release velocity
                close_note(status & 0x0F, pitch, tick);
                break;
            }
            case 0x90: {  // note on (velocity 0 == note off)
                int pitch = next_data() & 0x7F;
                int velocity = r.u8() & 0x7F;
                if (velocity == 0) {
                    close_note(status & 0x0F, pitch, tick);
                } else {
                    open[{status & 0x0F, pitch}].push_back(OpenNote{tick, velocity});
                }
                break;
            }
            case 0xA0:  // polyphonic pressure
            case 0xB0:  // controller
            case 0xE0:  // pitch bend
                next_data();
                r.u8();
                break;
            case 0xC0:  // program change
            case 0xD0:  // channel pressure
                next_data();
                break;
            case 0xF0: {
                running_status = 0;
                if (status == 0xF0 || status == 0xF7) {
                    r.skip(r.vlq());
                } else if (status == 0xFF) {
                    std::uint8_t type = r.u8();
                    std::uint32_t len = r.vlq();
                    std::size_t body = r.offset();
                    if (type == 0x2F) {
                        end_of_track = true;
                    } else if (type == 0x59 && len >= 2) {
                        int sharps = static_cast<std::int8_t>(r.u8());
                        bool minor = r.u8() != 0;
                        if (!out.key_signature)
                            out.key_signature = key_from_signature(sharps, minor);
                    }
                    // tempo (0x51) and all other meta events carry no slicing
                    // information; skip whatever of the body is left
                    r.skip(len - (r.offset() - body));
                } else {
                    throw DataError("unsupported status byte" + at_offset(r.offset() - 1));
                }
                break;
            }
            default:
                throw DataError("unsupported status byte" + at_offset(r.offset() - 1));
        }
    }

    // Anything still sounding is closed at the end-of-track tick.
    for (auto& [key, notes] : open) {
        while (!notes.empty()) {
            out.had_dangling_note = true;
            close_note(key.first, key.second, std::max<std::int64_t>(tick, notes.front().onset + 1));
        }
    }

    if (r.offset() < track_end) r.skip(track_end - r.offset());
}

}  // namespace

Piece parse_midi(std::span<const std::uint8_t> bytes, std::string source_path) {
    ByteReader r(bytes);
    Piece piece;
    piece.source_path = std::move(source_path);

    if (r.remaining() < 8 || r.u32() != 0x4D546864)  // 'MThd'
        throw DataError("not a Standard MIDI File (missing MThd)" + at_offset(0));
    std::uint32_t header_len = r.u32();
    if (header_len < 6)
        throw DataError("malformed MThd length" + at_offset(r.offset() - 4));
    std::uint16_t format = r.u16();
    std::uint16_t ntrks = r.u16();
    std::uint16_t division = r.u16();
    r.skip(header_len - 6);

    if (format > 1)
        throw DataError("unsupported SMF format " + std::to_string(format) + at_offset(8));
    if (division & 0x8000)
        throw DataError("SMPTE time division is not supported" + at_offset(12));
    if (division == 0)
        throw DataError("zero ticks-per-quarter division" + at_offset(12));
    piece.ticks_per_quarter = division;

    int tracks_seen = 0;
    while (tracks_seen < ntrks && r.remaining() > 0) {
        std::size_t chunk_at = r.offset();
        std::uint32_t chunk_id = r.u32();
        std::uint32_t chunk_len = r.u32();
        if (chunk_id != 0x4D54726B) {  // standard MIDI files may carry unknown chunks; skip them
            r.skip(chunk_len);
            continue;
        }
        if (chunk_len > r.remaining())
            throw DataError("track chunk longer than file" + at_offset(chunk_at));
        parse_track(r, chunk_len, tracks_seen, piece);
        ++tracks_seen;
    }
    if (tracks_seen < ntrks)
        throw DataError("file ends before track " + std::to_string(tracks_seen + 1) +
                        " of " + std::to_string(ntrks) + at_offset(bytes.size()));

    std::sort(piece.events.begin(), piece.events.end(),
              [](const NoteEvent& a, const NoteEvent& b) {
                  return std::tie(a.onset, a.pitch, a.duration, a.track) <
                         std::tie(b.onset, b.pitch, b.duration, b.track);
              });
    return piece;
}

Piece parse_midi_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open MIDI file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_midi(bytes, path);
}

namespace {

// Krumhansl-Kessler probe-tone profiles.
constexpr std::array<double, 12> kMajorProfile = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                  2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
constexpr std::array<double, 12> kMinorProfile = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                  2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

double pearson(const std::array<double, 12>& x, const std::array<double, 12>& y) {
    double mx = 0, my = 0;
    for (int i = 0; i < 12; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= 12;
    my /= 12;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < 12; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return 0.0;  // degenerate distribution
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

Key detect_key(const Piece& piece) {
    if (piece.key_signature) return *piece.key_signature;
    if (piece.events.empty()) throw DataError("cannot detect key of empty piece");

    std::array<double, 12> weight{};
    for (const NoteEvent& e : piece.events)
        weight[((e.pitch % 12) + 12) % 12] += static_cast<double>(e.duration);

    Key best{0, Mode::major};
    double best_r = -2.0;
    for (int mode_i = 0; mode_i < 2; ++mode_i) {
        const auto& profile = mode_i == 0 ? kMajorProfile : kMinorProfile;
        for (int tonic = 0; tonic < 12; ++tonic) {
            std::array<double, 12> rotated;
            for (int pc = 0; pc < 12; ++pc) rotated[pc] = profile[(pc - tonic + 12) % 12];
            double r = pearson(weight, rotated);
            if (r > best_r) {
                best_r = r;
                best = Key{tonic, mode_i == 0 ? Mode::major : Mode::minor};
            }
        }
    }
    return best;
}

Piece transpose_to_reference(const Piece& piece) {
    if (!piece.detected_key)
        throw DataError("transpose_to_reference requires a detected key");
    const Key key = *piece.detected_key;
    const int target = key.mode == Mode::major ? 0 : 9;
    int up = ((target - key.tonic) % 12 + 12) % 12;
    int offset = up <= 5 ? up : up - 12;  // +-6 tie resolves to -6

    Piece out = piece;
    for (NoteEvent& e : out.events) {
        e.pitch += offset;
        while (e.pitch < 0) e.pitch += 12;
        while (e.pitch > 127) e.pitch -= 12;
    }
    out.detected_key = Key{target, key.mode};
    if (out.key_signature) out.key_signature = out.detected_key;
    return out;
}

namespace {
constexpr std::array<const char*, 12> kPitchNames = {"C",  "Db", "D",  "Eb", "E",  "F",
                                                     "Gb", "G",  "Ab", "A",  "Bb", "B"};
}

std::string pitch_class_name(int pc) {
    return kPitchNames[((pc % 12) + 12) % 12];
}

std::string key_name(const Key& key) {
    return std::string(kPitchNames[key.tonic]) +
           (key.mode == Mode::major ? ":major" : ":minor");
}

Key parse_key(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw UsageError("key must look like <tonic>:<mode>, got '" + text + "'");
    std::string tonic_s = text.substr(0, colon);
    std::string mode_s = text.substr(colon + 1);
    for (auto& c : mode_s) c = static_cast<char>(std::tolower(c));

    Mode mode;
    if (mode_s == "major" || mode_s == "maj") mode = Mode::major;
    else if (mode_s == "minor" || mode_s == "min") mode = Mode::minor;
    else throw UsageError("unknown mode '" + mode_s + "'");

    int tonic = -1;
    if (!tonic_s.empty() && std::isdigit(static_cast<unsigned char>(tonic_s[0]))) {
        tonic = std::stoi(tonic_s);
    } else if (!tonic_s.empty()) {
        static const std::map<std::string, int> names = {
            {"c", 0},  {"c#", 1}, {"db", 1}, {"d", 2},  {"d#", 3}, {"eb", 3},
            {"e", 4},  {"f", 5},  {"f#", 6}, {"gb", 6}, {"g", 7},  {"g#", 8},
            {"ab", 8}, {"a", 9},  {"a#", 10}, {"bb", 10}, {"b", 11}};
        std::string low = tonic_s;
        for (auto& c : low) c = static_cast<char>(std::tolower(c));
        auto it = names.find(low);
        if (it != names.end()) tonic = it->second;
    }
    if (tonic < 0 || tonic > 11)
        throw UsageError("unknown tonic '" + tonic_s + "'");
    return Key{tonic, mode};
}

}  // namespace s2v
