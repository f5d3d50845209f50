#include "slice2vec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace s2v {

std::vector<QueryResult> nearest_neighbors(const EmbeddingModel& model, int query, int top_n,
                                           bool exclude_self) {
    if (query < 0 || query >= model.vocabulary.size())
        throw DataError("query token id " + std::to_string(query) + " out of range");
    if (top_n < 1) throw DataError("top_n must be >= 1");

    const auto q = model.input_vectors.row(query).cast<double>().eval();
    const double qn = q.norm();
    if (qn == 0.0) throw DataError("undefined similarity: zero-norm query vector");

    std::vector<QueryResult> results;
    results.reserve(model.vocabulary.size());
    for (int id = 0; id < model.vocabulary.size(); ++id) {
        if (exclude_self && id == query) continue;
        const auto v = model.input_vectors.row(id).cast<double>().eval();
        const double vn = v.norm();
        if (vn == 0.0) continue;
        results.push_back(QueryResult{id, model.vocabulary.word(id), q.dot(v) / (qn * vn),
                                      model.vocabulary.count(id)});
    }
    std::sort(results.begin(), results.end(), [](const QueryResult& a, const QueryResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (std::ssize(results) > top_n) results.resize(top_n);
    return results;
}

namespace {

constexpr char kMagic[4] = {'S', '2', 'V', '1'};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }

private:
    void le(std::uint64_t v, int n) {
        std::uint8_t buf[8];
        for (int i = 0; i < n; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
        bytes(buf, n);
    }
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::size_t offset() const { return offset_; }

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw DataError("unexpected end of file at offset " +
                            std::to_string(offset_ + static_cast<std::size_t>(in_.gcount())));
        offset_ += n;
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    bool at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

private:
    std::uint64_t le(int n) {
        std::uint8_t buf[8];
        bytes(buf, static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
        return v;
    }
    std::istream& in_;
    std::size_t offset_ = 0;
};

}  // namespace

void save_model(const EmbeddingModel& model, std::ostream& out) {
    Writer w(out);
    const int v = model.vocabulary.size();
    const int n = static_cast<int>(model.input_vectors.cols());

    w.bytes(kMagic, 4);
    w.u32(static_cast<std::uint32_t>(v));
    w.u32(static_cast<std::uint32_t>(n));
    w.u32(static_cast<std::uint32_t>(model.config.window));
    w.u32(static_cast<std::uint32_t>(model.config.negatives));
    w.u64(model.config.seed);
    w.f32(model.config.initial_lr);

    for (int id = 0; id < v; ++id) {
        const SliceWord& word = model.vocabulary.word(id);
        w.u16(static_cast<std::uint16_t>(word.pitches.size()));
        for (int p : word.pitches) w.u8(static_cast<std::uint8_t>(p));
        w.u64(model.vocabulary.count(id));
    }
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < n; ++j) w.f32(model.input_vectors(i, j));
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < n; ++j) w.f32(model.output_vectors(i, j));
    if (!out) throw DataError("write failure while saving model");
}

void save_model_file(const EmbeddingModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    save_model(model, out);
}

EmbeddingModel load_model(std::istream& in) {
    Reader r(in);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 3) != 0)
        throw DataError("not a model file (bad magic)");
    if (magic[3] != kMagic[3])
        throw DataError(std::string("unsupported model file version '") + magic[3] + "'");

    const auto v = static_cast<int>(r.u32());
    const auto n = static_cast<int>(r.u32());
    if (v < 0 || n < 1) throw DataError("corrupt model header");

    EmbeddingModel model;
    model.config.dims = n;
    model.config.window = static_cast<int>(r.u32());
    model.config.negatives = static_cast<int>(r.u32());
    model.config.seed = r.u64();
    model.config.initial_lr = r.f32();

    std::vector<SliceWord> words(static_cast<std::size_t>(v));
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(v));
    for (int id = 0; id < v; ++id) {
        const int pitch_count = r.u16();
        words[id].pitches.resize(pitch_count);
        for (int k = 0; k < pitch_count; ++k) words[id].pitches[k] = r.u8();
        counts[id] = r.u64();
    }
    model.vocabulary = Vocabulary(std::move(words), std::move(counts));

    model.input_vectors.resize(v, n);
    model.output_vectors.resize(v, n);
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < n; ++j) model.input_vectors(i, j) = r.f32();
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < n; ++j) model.output_vectors(i, j) = r.f32();
    if (!r.at_eof())
        throw DataError("trailing bytes after model data at offset " +
                        std::to_string(r.offset()));
    return model;
}

EmbeddingModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    return load_model(in);
}

}  // namespace s2v
