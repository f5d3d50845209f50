#include "slice2vec/corpus.hpp"

#include <fstream>
#include <sstream>

#include "slice2vec/errors.hpp"

namespace s2v {

std::vector<std::vector<SliceWord>> Corpus::word_sequences() const {
    std::vector<std::vector<SliceWord>> out;
    out.reserve(pieces.size());
    for (const CorpusPiece& piece : pieces) {
        std::vector<SliceWord> words;
        words.reserve(piece.slices.size());
        for (const Slice& s : piece.slices) words.push_back(s.word);
        out.push_back(std::move(words));
    }
    return out;
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const CorpusPiece& piece : corpus.pieces) {
        out << "#piece " << piece.path << ' ' << piece.slice_ticks << '\n';
        for (const Slice& s : piece.slices) out << format_slice(s) << '\n';
    }
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write corpus file: " + path);
    write_corpus(corpus, out);
}

Corpus read_corpus(std::istream& in) {
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    CorpusPiece* current = nullptr;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.starts_with("#piece ")) {
            // the path may contain spaces; slice_ticks is the final field
            std::string rest = line.substr(7);
            auto last_space = rest.rfind(' ');
            if (last_space == std::string::npos || last_space + 1 >= rest.size())
                throw DataError("corpus line " + std::to_string(line_no) +
                                ": malformed piece header");
            CorpusPiece piece;
            piece.path = rest.substr(0, last_space);
            std::string ticks = rest.substr(last_space + 1);
            if (ticks.find_first_not_of("0123456789") != std::string::npos || ticks.empty())
                throw DataError("corpus line " + std::to_string(line_no) +
                                ": bad slice_ticks '" + ticks + "'");
            piece.slice_ticks = std::stoll(ticks);
            if (piece.slice_ticks < 1)
                throw DataError("corpus line " + std::to_string(line_no) +
                                ": slice_ticks must be positive");
            corpus.pieces.push_back(std::move(piece));
            current = &corpus.pieces.back();
            continue;
        }
        if (line[0] == '#') continue;  // comment
        if (!current)
            throw DataError("corpus line " + std::to_string(line_no) +
                            ": slice before any #piece header");
        Slice slice;
        try {
            slice = parse_slice_line(line);
        } catch (const DataError& e) {
            throw DataError("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
        const auto index = static_cast<std::int64_t>(current->slices.size());
        slice.start_tick = index * current->slice_ticks;
        slice.end_tick = slice.start_tick + current->slice_ticks;
        current->slices.push_back(std::move(slice));
    }
    return corpus;
}

Corpus read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    return read_corpus(in);
}

}  // namespace s2v
