#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "slice2vec/embedding.hpp"
#include "slice2vec/errors.hpp"
#include "test_util.hpp"

using namespace s2v;
using namespace testutil;

namespace {

EmbeddingModel make_model(std::vector<SliceWord> words, std::vector<std::uint64_t> counts,
                          int dims, std::uint64_t fill_seed) {
    EmbeddingModel m;
    m.vocabulary = Vocabulary(std::move(words), std::move(counts));
    m.config.dims = dims;
    const int v = m.vocabulary.size();
    m.input_vectors.resize(v, dims);
    m.output_vectors.resize(v, dims);
    std::mt19937 gen(fill_seed);
    std::uniform_real_distribution<float> val(-1.0f, 1.0f);
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < dims; ++j) {
            m.input_vectors(i, j) = val(gen);
            m.output_vectors(i, j) = val(gen);
        }
    return m;
}

std::vector<SliceWord> distinct_words(int v) {
    std::vector<SliceWord> words;
    for (int i = 0; i < v; ++i) words.push_back(SliceWord{{i, 127}});
    return words;
}

}  // namespace

TEST_CASE("cosine similarity on hand-computed vectors") {
    Eigen::Vector2f ex(1.0f, 0.0f), ey(0.0f, 1.0f), diag(1.0f, 1.0f);
    CHECK(cosine_similarity(ex, diag) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cosine_similarity(ex, ey) == doctest::Approx(0.0));
    CHECK(cosine_similarity(diag, diag) == doctest::Approx(1.0));
    CHECK(cosine_similarity(diag, (-diag).eval()) == doctest::Approx(-1.0));
    // scale invariance
    CHECK(cosine_similarity((5.0f * ex).eval(), diag) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    Eigen::Vector3d a(1, 2, 3), b(-2, 0, 5);
    const double expected = (1 * -2 + 3 * 5) / (std::sqrt(14.0) * std::sqrt(29.0));
    CHECK(cosine_similarity(a, b) == doctest::Approx(expected).epsilon(1e-12));

    Eigen::Vector2f zero(0.0f, 0.0f);
    expect_error<DataError>([&] { cosine_similarity(zero, ex); }, "zero-norm");
    expect_error<DataError>([&] { cosine_similarity(ex, zero); }, "zero-norm");
}

TEST_CASE("nearest neighbors agree with an exhaustive double-precision scan") {
    const int V = 50, n = 16;
    std::vector<std::uint64_t> counts;
    for (int i = 0; i < V; ++i) counts.push_back(100 - i);
    EmbeddingModel m = make_model(distinct_words(V), counts, n, 2024);

    const int query = 13;
    // independent oracle: plain loops, double precision
    std::vector<std::pair<double, int>> oracle;
    for (int id = 0; id < V; ++id) {
        if (id == query) continue;
        double dot = 0, qq = 0, vv = 0;
        for (int j = 0; j < n; ++j) {
            const double a = m.input_vectors(query, j);
            const double b = m.input_vectors(id, j);
            dot += a * b;
            qq += a * a;
            vv += b * b;
        }
        oracle.emplace_back(dot / std::sqrt(qq * vv), id);
    }
    std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    auto got = nearest_neighbors(m, query, V, /*exclude_self=*/true);
    REQUIRE(got.size() == oracle.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].id == oracle[i].second);
        CHECK(got[i].score == doctest::Approx(oracle[i].first).epsilon(1e-10));
        CHECK(got[i].count == m.vocabulary.count(got[i].id));
        CHECK(got[i].word == m.vocabulary.word(got[i].id));
    }

    auto top5 = nearest_neighbors(m, query, 5);
    REQUIRE(top5.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(top5[i].id == got[i].id);
}

TEST_CASE("neighbor ties break toward the smaller id") {
    EmbeddingModel m = make_model(distinct_words(4), {4, 3, 2, 1}, 2, 1);
    m.input_vectors << 3, 0,  // query
        0, 1,                 // orthogonal
        1, 0,                 // cosine 1, id 2
        2, 0;                 // cosine 1, id 3
    auto got = nearest_neighbors(m, 0, 10);
    REQUIRE(got.size() == 3);
    CHECK(got[0].id == 2);
    CHECK(got[0].score == doctest::Approx(1.0));
    CHECK(got[1].id == 3);
    CHECK(got[1].score == doctest::Approx(1.0));
    CHECK(got[2].id == 1);
}

TEST_CASE("self-match, zero rows, and bad queries") {
    EmbeddingModel m = make_model(distinct_words(5), {5, 4, 3, 2, 1}, 4, 9);
    m.input_vectors.row(3).setZero();

    auto with_self = nearest_neighbors(m, 0, 10, /*exclude_self=*/false);
    REQUIRE(!with_self.empty());
    CHECK(with_self[0].id == 0);
    CHECK(with_self[0].score == doctest::Approx(1.0));

    auto got = nearest_neighbors(m, 0, 10);
    CHECK(got.size() == 3);  // 5 minus self minus the zero row
    for (const auto& r : got) CHECK(r.id != 3);

    expect_error<DataError>([&] { nearest_neighbors(m, 0, 0); }, "top_n");
    expect_error<DataError>([&] { nearest_neighbors(m, -1, 5); }, "out of range");
    expect_error<DataError>([&] { nearest_neighbors(m, 5, 5); }, "out of range");
    expect_error<DataError>([&] { nearest_neighbors(m, 3, 5); }, "zero-norm");
}

TEST_CASE("model file bytes match the frozen layout") {
    EmbeddingModel m;
    m.vocabulary = Vocabulary({SliceWord{{60, 64}}, SliceWord{{}}}, {9, 7});
    m.config.dims = 1;
    m.config.window = 3;
    m.config.negatives = 2;
    m.config.seed = 0x0123456789ABCDEFull;
    m.config.initial_lr = 0.5f;
    m.input_vectors.resize(2, 1);
    m.output_vectors.resize(2, 1);
    m.input_vectors << 0.25f, -1.0f;
    m.output_vectors << 0.0f, 2.0f;

    std::ostringstream out(std::ios::binary);
    save_model(m, out);
    const std::string bytes = out.str();

    const unsigned char expected[] = {
        'S', '2', 'V', '1',                              // magic + version
        0x02, 0x00, 0x00, 0x00,                          // V = 2
        0x01, 0x00, 0x00, 0x00,                          // n = 1
        0x03, 0x00, 0x00, 0x00,                          // window = 3
        0x02, 0x00, 0x00, 0x00,                          // negatives = 2
        0xEF, 0xCD, 0xAB, 0x89, 0x67, 0x45, 0x23, 0x01,  // seed
        0x00, 0x00, 0x00, 0x3F,                          // 0.5f
        0x02, 0x00, 60, 64,                              // word 0: 2 pitches
        0x09, 0, 0, 0, 0, 0, 0, 0,                       // count 9
        0x00, 0x00,                                      // word 1: rest
        0x07, 0, 0, 0, 0, 0, 0, 0,                       // count 7
        0x00, 0x00, 0x80, 0x3E,                          // in(0,0) = 0.25f
        0x00, 0x00, 0x80, 0xBF,                          // in(1,0) = -1.0f
        0x00, 0x00, 0x00, 0x00,                          // out(0,0) = 0.0f
        0x00, 0x00, 0x00, 0x40,                          // out(1,0) = 2.0f
    };
    REQUIRE(bytes.size() == sizeof(expected));
    for (std::size_t i = 0; i < sizeof(expected); ++i) {
        CAPTURE(i);
        CHECK(static_cast<unsigned char>(bytes[i]) == expected[i]);
    }
}

TEST_CASE("save -> load -> save is byte-identical and field-faithful") {
    std::vector<SliceWord> words = {SliceWord{{60, 64, 67}}, SliceWord{{}}, SliceWord{{0}},
                                    SliceWord{{127}}, SliceWord{{11, 45, 117}}};
    EmbeddingModel m = make_model(words, {50, 40, 30, 20, 0x100000001ull}, 7, 31);
    m.config.window = 2;
    m.config.negatives = 9;
    m.config.seed = 424242;
    m.config.initial_lr = 0.0625f;

    std::ostringstream out1(std::ios::binary);
    save_model(m, out1);
    std::istringstream in(out1.str(), std::ios::binary);
    EmbeddingModel back = load_model(in);

    CHECK(back.vocabulary.size() == 5);
    for (int id = 0; id < 5; ++id) {
        CHECK(back.vocabulary.word(id) == m.vocabulary.word(id));
        CHECK(back.vocabulary.count(id) == m.vocabulary.count(id));
    }
    CHECK(back.config.dims == 7);
    CHECK(back.config.window == 2);
    CHECK(back.config.negatives == 9);
    CHECK(back.config.seed == 424242);
    CHECK(back.config.initial_lr == 0.0625f);
    CHECK(back.input_vectors == m.input_vectors);
    CHECK(back.output_vectors == m.output_vectors);

    std::ostringstream out2(std::ios::binary);
    save_model(back, out2);
    CHECK(out1.str() == out2.str());
}

TEST_CASE("model round trip through a real file") {
    EmbeddingModel m = make_model(distinct_words(6), {6, 5, 4, 3, 2, 1}, 3, 77);
    const auto path = std::filesystem::temp_directory_path() / "s2v_test_model.s2v";
    save_model_file(m, path.string());
    EmbeddingModel back = load_model_file(path.string());
    CHECK(back.input_vectors == m.input_vectors);
    CHECK(back.output_vectors == m.output_vectors);
    std::filesystem::remove(path);

    expect_error<DataError>([&] { load_model_file("/nonexistent/dir/x.s2v"); },
                            "cannot open model file");
}

TEST_CASE("corrupt model files are rejected with located errors") {
    EmbeddingModel m = make_model(distinct_words(2), {2, 1}, 1, 5);
    std::ostringstream out(std::ios::binary);
    save_model(m, out);
    const std::string good = out.str();

    auto load_bytes = [](std::string bytes) {
        std::istringstream in(std::move(bytes), std::ios::binary);
        return load_model(in);
    };

    SUBCASE("bad magic") {
        std::string bad = good;
        bad[0] = 'X';
        expect_error<DataError>([&] { load_bytes(bad); }, "not a model file");
    }
    SUBCASE("unknown version") {
        std::string bad = good;
        bad[3] = '9';
        expect_error<DataError>([&] { load_bytes(bad); }, "unsupported model file version '9'");
    }
    SUBCASE("truncated header") {
        expect_error<DataError>([&] { load_bytes(good.substr(0, 10)); },
                                "unexpected end of file at offset 10");
    }
    SUBCASE("truncated matrix data") {
        expect_error<DataError>([&] { load_bytes(good.substr(0, good.size() - 2)); },
                                "unexpected end of file");
    }
    SUBCASE("trailing garbage") {
        expect_error<DataError>([&] { load_bytes(good + "!"); },
                                "trailing bytes after model data at offset " +
                                    std::to_string(good.size()));
    }
    SUBCASE("empty stream") {
        expect_error<DataError>([&] { load_bytes(""); }, "unexpected end of file at offset 0");
    }
}

TEST_CASE("a freshly trained model survives the round trip") {
    TrainingConfig cfg;
    cfg.dims = 10;
    cfg.epochs = 2;
    cfg.seed = 3;
    cfg.log_every = 100;
    std::vector<SliceWord> words = {SliceWord{{60}}, SliceWord{{64}}, SliceWord{{67}}};
    EmbeddingModel m = init_model(Vocabulary(words, {3, 2, 1}), cfg);
    train(m, {TokenSequence{{0, 1, 2, 0, 1, 2}}});

    std::ostringstream out(std::ios::binary);
    save_model(m, out);
    std::istringstream in(out.str(), std::ios::binary);
    EmbeddingModel back = load_model(in);
    CHECK(back.input_vectors == m.input_vectors);
    CHECK(back.output_vectors == m.output_vectors);

    // neighbor queries behave identically on the reloaded model
    auto a = nearest_neighbors(m, 0, 2);
    auto b = nearest_neighbors(back, 0, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].score == b[i].score);
    }
}