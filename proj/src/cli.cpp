#include "slice2vec/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "slice2vec/analysis.hpp"
#include "slice2vec/corpus.hpp"
#include "slice2vec/embedding.hpp"
#include "slice2vec/errors.hpp"
#include "slice2vec/midi.hpp"
#include "slice2vec/remix.hpp"
#include "slice2vec/sgns.hpp"
#include "slice2vec/slicer.hpp"
#include "slice2vec/svg.hpp"
#include "slice2vec/tsne.hpp"
#include "slice2vec/vocabulary.hpp"

namespace fs = std::filesystem;

namespace s2v {

namespace {

// ---------------------------------------------------------------- logging

void log_info(const std::string& msg) { fmt::print(stderr, "[info] {}\n", msg); }
void log_warn(const std::string& msg) { fmt::print(stderr, "[warn] {}\n", msg); }
void log_error(const std::string& msg) { fmt::print(stderr, "[error] {}\n", msg); }

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError(fmt::format("cannot open '{}' for writing", path));
    return f;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    return parts;
}

// ---------------------------------------------------------------- config file

struct ConfigEntry {
    int line = 0;
    std::string key;
    std::string value;
};

std::vector<ConfigEntry> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError(fmt::format("cannot open config file '{}'", path));
    std::vector<ConfigEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError(
                fmt::format("config line {}: expected key=value, got '{}'", line_no, t));
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw UsageError(fmt::format("config line {}: empty key", line_no));
        entries.push_back({line_no, key, value});
    }
    return entries;
}

// Per-subcommand map from config key to a typed setter, so config values can
// be merged after parsing with command-line flags taking precedence.
struct FlagRegistry {
    CLI::App* cmd = nullptr;
    std::map<std::string, std::function<void(const std::string&)>> setters;

    template <typename T>
    void add(const std::string& name, T& var, const std::string& desc) {
        cmd->add_option("--" + name, var, desc);
        setters[name] = [&var, name](const std::string& value) {
            T tmp{};
            if (!CLI::detail::lexical_cast(value, tmp))
                throw UsageError(
                    fmt::format("config value for '{}' is not a valid {}: '{}'", name,
                                typeid(T) == typeid(std::string) ? "string" : "number", value));
            var = tmp;
        };
    }
};

// ---------------------------------------------------------------- option sets

struct IngestOpts {
    std::string input;
    std::string out;
    std::string key_override;
    double ioi_threshold = 0.05;
    int jobs = 1;
};

struct TrainOpts {
    std::string corpus;
    std::string out;
    std::string loss_log;
    int dims = 128;
    int window = 1;
    int negatives = 5;
    int epochs = 5;
    int threads = 1;
    double initial_lr = 0.025;
    double lr_floor = 1e-4;
    double noise_exponent = 0.75;
    double subsample = 0.0;
    std::int64_t log_every = 2000;
    std::uint64_t min_count = 0;
};

struct NearestOpts {
    std::string model;
    std::string slice;
    int top = 10;
};

struct LabelOpts {
    std::string corpus;
    std::string out;
};

struct TsneOpts {
    std::string model;
    std::string filter_chords;
    std::string labels;
    std::string out;
    std::string svg;
    double perplexity = 30.0;
    double learning_rate = 200.0;
    int iterations = 1000;
};

struct RemixOpts {
    std::string model;
    std::string in;
    std::string positions;
    std::string out;
    std::string report;
};

struct TonalOpts {
    std::string a;
    std::string b;
};

struct StatsOpts {
    std::string corpus;
    std::string csv;
};

void require_value(const std::string& value, const std::string& command,
                   const std::string& flag) {
    if (value.empty())
        throw UsageError(fmt::format("{}: --{} is required", command, flag));
}

// ---------------------------------------------------------------- ingest

std::vector<fs::path> collect_midi_files(const std::string& input) {
    fs::path root(input);
    if (!fs::exists(root))
        throw DataError(fmt::format("input path '{}' does not exist", input));
    if (!fs::is_directory(root)) return {root};

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == ".mid" || ext == ".midi") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) {
                  return a.generic_string() < b.generic_string();
              });
    if (files.empty())
        throw DataError(fmt::format("no .mid/.midi files under '{}'", input));
    return files;
}

int cmd_ingest(const IngestOpts& o) {
    require_value(o.out, "ingest", "out");
    std::optional<Key> override_key;
    if (!o.key_override.empty()) override_key = parse_key(o.key_override);
    if (!(o.ioi_threshold >= 0.0 && o.ioi_threshold < 1.0))
        throw UsageError("--ioi-threshold must be in [0, 1)");

    const auto files = collect_midi_files(o.input);

    struct Item {
        CorpusPiece piece;
        std::vector<std::pair<bool, std::string>> logs;  // (is_warning, message)
    };
    std::vector<Item> items(files.size());
    std::vector<std::exception_ptr> failures(files.size());

    auto process = [&](std::size_t i) {
        const std::string path = files[i].generic_string();
        try {
            Piece piece = parse_midi_file(path);
            Item item;
            if (piece.had_dangling_note)
                item.logs.emplace_back(true,
                                       fmt::format("{}: dangling note-on closed at end of track", path));
            piece.detected_key = override_key ? *override_key : detect_key(piece);
            item.logs.emplace_back(
                false, fmt::format("{}: key {}{}", path, key_name(*piece.detected_key),
                                   override_key ? " (override)" : ""));
            piece = transpose_to_reference(piece);
            const std::int64_t ticks = compute_slice_duration(piece, o.ioi_threshold);
            CorpusPiece cp;
            cp.path = path;
            cp.slice_ticks = ticks;
            cp.slices = slice_piece(piece, ticks);
            item.piece = std::move(cp);
            items[i] = std::move(item);
        } catch (const DataError& e) {
            failures[i] = std::make_exception_ptr(DataError(fmt::format("{}: {}", path, e.what())));
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };

    const int jobs = std::clamp<int>(o.jobs, 1, static_cast<int>(files.size()));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < files.size(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1))
                    process(i);
            });
        for (auto& t : pool) t.join();
    }
    for (auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    Corpus corpus;
    std::uint64_t total_slices = 0;
    for (auto& item : items) {
        for (const auto& [warn, msg] : item.logs) (warn ? log_warn : log_info)(msg);
        total_slices += item.piece.slices.size();
        corpus.pieces.push_back(std::move(item.piece));
    }
    write_corpus_file(corpus, o.out);
    log_info(fmt::format("wrote {} piece(s), {} slice(s) -> {}", corpus.pieces.size(),
                         total_slices, o.out));
    return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(const TrainOpts& o, std::uint64_t seed) {
    require_value(o.corpus, "train", "corpus");
    require_value(o.out, "train", "out");
    if (o.dims < 1) throw UsageError("--dims must be >= 1");
    if (o.window < 1) throw UsageError("--window must be >= 1");
    if (o.negatives < 1) throw UsageError("--negatives must be >= 1");
    if (o.epochs < 0) throw UsageError("--epochs must be >= 0");
    if (o.threads < 1) throw UsageError("--threads must be >= 1");
    if (o.log_every < 1) throw UsageError("--log-every must be >= 1");

    Corpus corpus = read_corpus_file(o.corpus);
    auto [vocab, sequences] = build_vocabulary(corpus.word_sequences(), o.min_count);
    log_info(fmt::format("vocabulary: {} words over {} tokens", vocab.size(),
                         vocab.total_tokens()));
    if (o.subsample > 0.0) {
        sequences = subsample_sequences(sequences, vocab, o.subsample, seed);
        std::int64_t kept = 0;
        for (const auto& s : sequences) kept += static_cast<std::int64_t>(s.tokens.size());
        log_info(fmt::format("subsampling (t={}) kept {} of {} tokens", o.subsample, kept,
                             vocab.total_tokens()));
    }

    TrainingConfig cfg;
    cfg.dims = o.dims;
    cfg.window = o.window;
    cfg.negatives = o.negatives;
    cfg.epochs = o.epochs;
    cfg.initial_lr = static_cast<float>(o.initial_lr);
    cfg.lr_floor = static_cast<float>(o.lr_floor);
    cfg.noise_exponent = static_cast<float>(o.noise_exponent);
    cfg.log_every = o.log_every;
    cfg.threads = o.threads;
    cfg.seed = seed;
    if (cfg.threads > 1)
        log_warn("multi-threaded training is not bit-reproducible");

    EmbeddingModel model = init_model(vocab, cfg);
    const auto records = train(model, sequences);

    if (!o.loss_log.empty()) {
        auto f = open_output(o.loss_log);
        f << "step,mean_loss\n";
        for (const auto& r : records) f << fmt::format("{},{:.6f}\n", r.step, r.mean_loss);
    }
    if (!records.empty())
        log_info(fmt::format("trained {} window(s); final mean loss {:.4f}",
                             records.back().step, records.back().mean_loss));
    save_model_file(model, o.out);
    log_info(fmt::format("wrote model ({} x {}) -> {}", vocab.size(), cfg.dims, o.out));
    return 0;
}

// ---------------------------------------------------------------- nearest

double pitch_set_overlap(const SliceWord& a, const SliceWord& b) {
    if (a.pitches.empty() && b.pitches.empty()) return 0.0;
    std::vector<int> inter;
    std::set_intersection(a.pitches.begin(), a.pitches.end(), b.pitches.begin(),
                          b.pitches.end(), std::back_inserter(inter));
    const double uni = static_cast<double>(a.pitches.size() + b.pitches.size() - inter.size());
    return uni == 0.0 ? 0.0 : static_cast<double>(inter.size()) / uni;
}

int cmd_nearest(const NearestOpts& o) {
    require_value(o.model, "nearest", "model");
    require_value(o.slice, "nearest", "slice");
    if (o.top < 1) throw UsageError("--top must be >= 1");

    EmbeddingModel model = load_model_file(o.model);
    const SliceWord query = parse_word(o.slice);
    const auto id = model.vocabulary.id_of(query);
    if (!id) {
        // Rank the vocabulary by pitch-set overlap so the error suggests
        // spellings the model has actually seen.
        std::vector<std::pair<double, int>> ranked;
        for (int i = 0; i < model.vocabulary.size(); ++i)
            ranked.emplace_back(-pitch_set_overlap(query, model.vocabulary.word(i)), i);
        std::sort(ranked.begin(), ranked.end());
        std::string hint;
        for (std::size_t i = 0; i < ranked.size() && i < 5; ++i) {
            if (!hint.empty()) hint += ", ";
            hint += format_word(model.vocabulary.word(ranked[i].second));
        }
        throw DataError(fmt::format(
            "slice '{}' is not in the vocabulary; closest by pitch overlap: {}",
            format_word(query), hint));
    }

    const auto results = nearest_neighbors(model, *id, o.top, /*exclude_self=*/true);
    fmt::print("rank\tslice\tcosine\tcount\n");
    for (std::size_t i = 0; i < results.size(); ++i)
        fmt::print("{}\t{}\t{:.6f}\t{}\n", i + 1, format_word(results[i].word),
                   results[i].score, results[i].count);
    return 0;
}

// ---------------------------------------------------------------- label

int cmd_label(const LabelOpts& o) {
    require_value(o.corpus, "label", "corpus");
    require_value(o.out, "label", "out");

    Corpus corpus = read_corpus_file(o.corpus);
    auto f = open_output(o.out);
    f << "piece,slice_index,root,quality,score\n";
    std::uint64_t labeled = 0, total = 0;
    for (const auto& piece : corpus.pieces)
        for (std::size_t i = 0; i < piece.slices.size(); ++i) {
            const ChordLabel label = label_chord(piece.slices[i].word);
            ++total;
            if (label.labeled) ++labeled;
            f << fmt::format("{},{},{},{},{}\n", csv_escape(piece.path), i,
                             label.labeled ? pitch_class_name(label.root) : "-",
                             label.labeled ? (label.quality == Mode::major ? "major" : "minor")
                                           : "-",
                             label.match_score);
        }
    log_info(fmt::format("labeled {} of {} slice(s) -> {}", labeled, total, o.out));
    return 0;
}

// ---------------------------------------------------------------- tsne

int cmd_tsne(const TsneOpts& o, std::uint64_t seed) {
    require_value(o.model, "tsne", "model");
    require_value(o.out, "tsne", "out");
    if (o.iterations < 1) throw UsageError("--iterations must be >= 1");
    if (o.perplexity < 2.0) throw UsageError("--perplexity must be >= 2");

    EmbeddingModel model = load_model_file(o.model);

    if (!o.labels.empty()) {
        std::ifstream lf(o.labels);
        if (!lf) throw DataError(fmt::format("cannot open labels file '{}'", o.labels));
        std::string header;
        std::getline(lf, header);
        if (trim(header) != "piece,slice_index,root,quality,score")
            throw DataError(fmt::format("'{}' is not a labels file (unexpected header)", o.labels));
        log_info(fmt::format(
            "labels file '{}' checked; chord labels are recomputed from slice contents",
            o.labels));
    }

    std::set<std::string> filter;
    if (!o.filter_chords.empty())
        for (const auto& part : split(o.filter_chords, ',')) {
            const std::string name = trim(part);
            if (name.empty())
                throw UsageError("--filter-chords: empty chord name in list");
            filter.insert(name);
        }

    std::vector<int> selected;
    std::vector<ChordLabel> labels(model.vocabulary.size());
    for (int i = 0; i < model.vocabulary.size(); ++i) {
        labels[i] = label_chord(model.vocabulary.word(i));
        if (filter.empty() || filter.count(chord_name(labels[i]))) selected.push_back(i);
    }
    if (selected.size() < 3)
        throw DataError(fmt::format(
            "t-SNE needs at least 3 slices, have {}{}", selected.size(),
            filter.empty() ? "" : " after --filter-chords"));

    Eigen::MatrixXd points(static_cast<Eigen::Index>(selected.size()),
                           model.input_vectors.cols());
    for (std::size_t r = 0; r < selected.size(); ++r)
        points.row(static_cast<Eigen::Index>(r)) =
            model.input_vectors.row(selected[r]).cast<double>();

    TsneConfig cfg;
    cfg.perplexity = o.perplexity;
    cfg.iterations = o.iterations;
    cfg.learning_rate = o.learning_rate;
    cfg.seed = seed;
    const TsneResult result = tsne_embed(points, cfg);

    auto f = open_output(o.out);
    f << "token_id,x,y,chord_root,chord_quality\n";
    std::vector<ScatterPoint> scatter;
    for (std::size_t r = 0; r < selected.size(); ++r) {
        const int token = selected[r];
        const ChordLabel& label = labels[token];
        const double x = result.embedding(static_cast<Eigen::Index>(r), 0);
        const double y = result.embedding(static_cast<Eigen::Index>(r), 1);
        f << fmt::format("{},{:.6f},{:.6f},{},{}\n", token, x, y,
                         label.labeled ? pitch_class_name(label.root) : "-",
                         label.labeled ? (label.quality == Mode::major ? "major" : "minor")
                                       : "-");
        scatter.push_back({x, y, chord_name(label)});
    }
    if (!o.svg.empty())
        write_scatter_svg(o.svg, scatter, "slice embeddings (t-SNE)");

    log_info(fmt::format("embedded {} slice(s); final KL divergence {:.4f} -> {}",
                         selected.size(), result.kl_trace.back(), o.out));
    return 0;
}

// ---------------------------------------------------------------- remix

int cmd_remix(const RemixOpts& o) {
    require_value(o.model, "remix", "model");
    require_value(o.in, "remix", "in");
    require_value(o.positions, "remix", "positions");
    require_value(o.out, "remix", "out");
    require_value(o.report, "remix", "report");

    EmbeddingModel model = load_model_file(o.model);
    Piece piece = parse_midi_file(o.in);
    piece.detected_key = detect_key(piece);
    log_info(fmt::format("{}: key {}", o.in, key_name(*piece.detected_key)));
    piece = transpose_to_reference(piece);
    const std::int64_t ticks = compute_slice_duration(piece);
    const std::vector<Slice> score = slice_piece(piece, ticks);

    std::vector<int> positions;
    if (trim(o.positions) == "all") {
        for (std::size_t i = 0; i < score.size(); ++i)
            if (!score[i].word.empty()) positions.push_back(static_cast<int>(i));
    } else {
        for (const auto& part : split(o.positions, ',')) {
            int value = 0;
            if (!CLI::detail::lexical_cast(trim(part), value))
                throw UsageError(fmt::format(
                    "--positions must be 'all' or comma-separated indices, got '{}'", part));
            positions.push_back(value);
        }
    }

    const auto [modified, report] = replace_slices(score, model, positions);
    for (int pos : report.skipped_empty)
        log_warn(fmt::format("position {} is a rest; skipped", pos));

    render_midi_file(modified, ticks, piece.ticks_per_quarter, o.out);

    auto f = open_output(o.report);
    f << "position,original,replacement,cosine,tonnetz_distance,held_conflicts\n";
    for (const auto& row : report.rows) {
        std::string conflicts;
        for (std::size_t i = 0; i < row.held_conflicts.size(); ++i) {
            if (i) conflicts += ';';
            conflicts += std::to_string(row.held_conflicts[i]);
        }
        f << fmt::format("{},{},{},{:.6f},{},{}\n", row.position,
                         csv_escape(format_word(row.original)),
                         csv_escape(format_word(row.replacement)), row.cosine,
                         row.tonnetz ? fmt::format("{:.6f}", *row.tonnetz) : "undefined",
                         conflicts);
    }
    log_info(fmt::format("replaced {} slice(s) -> {} (report: {})", report.rows.size(),
                         o.out, o.report));
    return 0;
}

// ---------------------------------------------------------------- tonal-distance

int cmd_tonal(const TonalOpts& o) {
    require_value(o.a, "tonal-distance", "a");
    require_value(o.b, "tonal-distance", "b");
    const double d = tonnetz_distance(parse_word(o.a), parse_word(o.b));
    fmt::print("{:.6f}\n", d);
    return 0;
}

// ---------------------------------------------------------------- stats

int cmd_stats(const StatsOpts& o) {
    Corpus corpus = read_corpus_file(o.corpus);
    if (corpus.pieces.empty())
        throw DataError(fmt::format("empty corpus file: '{}'", o.corpus));

    const CorpusStats st = corpus_stats(corpus);
    fmt::print("pieces: {}\n", st.pieces.size());
    fmt::print("total tokens (T): {}\n", st.total_tokens);
    fmt::print("vocabulary size (V): {}\n", st.vocab_size);
    fmt::print("slice duration histogram (ticks -> pieces):\n");
    for (const auto& [ticks, n] : st.slice_ticks_histogram)
        fmt::print("  {:>8} : {}\n", ticks, n);
    fmt::print("per piece:\n");
    for (const auto& p : st.pieces)
        fmt::print("  {}  slices={}  slice_ticks={}\n", p.path, p.slices, p.slice_ticks);

    if (!o.csv.empty()) {
        auto f = open_output(o.csv);
        f << "piece,slices,slice_ticks\n";
        for (const auto& p : st.pieces)
            f << fmt::format("{},{},{}\n", csv_escape(p.path), p.slices, p.slice_ticks);
    }
    return 0;
}

// ---------------------------------------------------------------- wiring

int run_impl(int argc, const char* const* argv) {
    CLI::App app{"slice2vec: skip-gram embeddings of polyphonic music slices"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 1;
    app.add_option("--config", config_path,
                   "key=value config file; command-line flags override its values");
    app.add_option("--seed", seed, "random seed shared by train and tsne (default 1)");

    IngestOpts ingest;
    TrainOpts train_o;
    NearestOpts nearest;
    LabelOpts label;
    TsneOpts tsne;
    RemixOpts remix;
    TonalOpts tonal;
    StatsOpts stats;

    std::map<std::string, FlagRegistry> registries;

    auto make_sub = [&](const std::string& name, const std::string& desc) -> FlagRegistry& {
        CLI::App* cmd = app.add_subcommand(name, desc);
        cmd->fallthrough();
        FlagRegistry& reg = registries[name];
        reg.cmd = cmd;
        return reg;
    };

    {
        auto& r = make_sub("ingest", "parse MIDI, transpose to C/a, slice, write a corpus");
        r.cmd->add_option("input", ingest.input, "MIDI file or directory")->required();
        r.add("out", ingest.out, "corpus file to write");
        r.add("key-override", ingest.key_override, "skip key detection, e.g. 'Eb:major'");
        r.add("ioi-threshold", ingest.ioi_threshold,
              "minimum share of inter-onset intervals for the slice duration (default 0.05)");
        r.add("jobs", ingest.jobs, "parallel file parsers (default 1)");
    }
    {
        auto& r = make_sub("train", "learn slice embeddings from a corpus");
        r.add("corpus", train_o.corpus, "corpus file");
        r.add("out", train_o.out, "model file to write");
        r.add("dims", train_o.dims, "embedding dimensions (default 128)");
        r.add("window", train_o.window, "context window size (default 1)");
        r.add("negatives", train_o.negatives, "negative samples per window (default 5)");
        r.add("epochs", train_o.epochs, "passes over the corpus (default 5)");
        r.add("initial-lr", train_o.initial_lr, "starting learning rate (default 0.025)");
        r.add("lr-floor", train_o.lr_floor, "final learning rate (default 1e-4)");
        r.add("noise-exponent", train_o.noise_exponent,
              "unigram power for negative sampling (default 0.75)");
        r.add("min-count", train_o.min_count, "drop words rarer than this (default 0 = keep all)");
        r.add("subsample", train_o.subsample,
              "frequent-word subsampling threshold (default 0 = off)");
        r.add("log-every", train_o.log_every, "windows per loss record (default 2000)");
        r.add("threads", train_o.threads, "worker threads; >1 waives determinism (default 1)");
        r.add("loss-log", train_o.loss_log, "CSV file for the loss trace");
    }
    {
        auto& r = make_sub("nearest", "query nearest slices by cosine similarity");
        r.add("model", nearest.model, "model file");
        r.add("slice", nearest.slice, "query slice, e.g. \"60,64,67\"");
        r.add("top", nearest.top, "number of neighbors (default 10)");
    }
    {
        auto& r = make_sub("label", "chord-label every slice of a corpus");
        r.add("corpus", label.corpus, "corpus file");
        r.add("out", label.out, "labels CSV to write");
    }
    {
        auto& r = make_sub("tsne", "project embeddings to 2-D with t-SNE");
        r.add("model", tsne.model, "model file");
        r.add("out", tsne.out, "points CSV to write");
        r.add("filter-chords", tsne.filter_chords,
              "only plot slices labeled with these chords, e.g. \"E,Eb\"");
        r.add("labels", tsne.labels, "labels CSV (checked; labels are recomputed)");
        r.add("svg", tsne.svg, "also write an SVG scatter plot");
        r.add("perplexity", tsne.perplexity, "t-SNE perplexity (default 30)");
        r.add("iterations", tsne.iterations, "gradient iterations (default 1000)");
        r.add("learning-rate", tsne.learning_rate, "t-SNE learning rate (default 200)");
    }
    {
        auto& r = make_sub("remix", "replace slices of a piece with nearest neighbors");
        r.add("model", remix.model, "model file");
        r.add("in", remix.in, "MIDI file to transform");
        r.add("positions", remix.positions, "comma-separated slice indices, or 'all'");
        r.add("out", remix.out, "MIDI file to write");
        r.add("report", remix.report, "replacement report CSV to write");
    }
    {
        auto& r = make_sub("tonal-distance", "tonnetz distance between two slices");
        r.add("a", tonal.a, "first slice, e.g. \"61,65,68\"");
        r.add("b", tonal.b, "second slice, e.g. \"68\"");
    }
    {
        auto& r = make_sub("stats", "corpus statistics");
        r.cmd->add_option("corpus", stats.corpus, "corpus file")->required();
        r.add("csv", stats.csv, "also write per-piece stats as CSV");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        fmt::print("{}", app.help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        fmt::print("{}", app.help("", CLI::AppFormatMode::All));
        return 0;
    } catch (const CLI::ParseError& e) {
        log_error(e.what());
        fmt::print(stderr, "\n{}", app.help());
        return 1;
    }

    CLI::App* active = app.get_subcommands().front();
    const std::string active_name = active->get_name();

    if (!config_path.empty()) {
        for (const ConfigEntry& entry : read_config_file(config_path)) {
            if (entry.key == "seed") {
                if (app.count("--seed") == 0 &&
                    !CLI::detail::lexical_cast(entry.value, seed))
                    throw UsageError(fmt::format("config line {}: invalid seed '{}'",
                                                 entry.line, entry.value));
                continue;
            }
            bool known = false;
            for (const auto& [name, reg] : registries)
                if (reg.setters.count(entry.key)) known = true;
            if (!known)
                throw UsageError(fmt::format("config line {}: unknown key '{}'", entry.line,
                                             entry.key));
            const FlagRegistry& reg = registries.at(active_name);
            auto it = reg.setters.find(entry.key);
            if (it == reg.setters.end()) continue;  // belongs to another subcommand
            if (active->count("--" + entry.key) > 0) continue;  // flag wins
            it->second(entry.value);
        }
    }

    if (active_name == "ingest") return cmd_ingest(ingest);
    if (active_name == "train") return cmd_train(train_o, seed);
    if (active_name == "nearest") return cmd_nearest(nearest);
    if (active_name == "label") return cmd_label(label);
    if (active_name == "tsne") return cmd_tsne(tsne, seed);
    if (active_name == "remix") return cmd_remix(remix);
    if (active_name == "tonal-distance") return cmd_tonal(tonal);
    if (active_name == "stats") return cmd_stats(stats);
    throw UsageError("unknown subcommand");  // unreachable with require_subcommand(1)
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats st;
    std::unordered_set<SliceWord, SliceWordHash> distinct;
    for (const auto& piece : corpus.pieces) {
        st.pieces.push_back(
            {piece.path, piece.slices.size(), piece.slice_ticks});
        ++st.slice_ticks_histogram[piece.slice_ticks];
        for (const auto& slice : piece.slices) {
            ++st.total_tokens;
            distinct.insert(slice.word);
        }
    }
    st.vocab_size = distinct.size();
    return st;
}

int run(int argc, const char* const* argv) {
    try {
        return run_impl(argc, argv);
    } catch (const UsageError& e) {
        log_error(e.what());
        return 1;
    } catch (const NumericalError& e) {
        log_error(e.what());
        return 3;
    } catch (const DataError& e) {
        log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
}

}  // namespace s2v
