#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slice2vec/errors.hpp"
#include "slice2vec/sgns.hpp"

namespace s2v {

// Standard cosine of the angle between two non-zero vectors, evaluated in
// double precision. Works on any Eigen vector expression.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
    const auto ad = a.derived().template cast<double>().eval();
    const auto bd = b.derived().template cast<double>().eval();
    const double na = ad.norm();
    const double nb = bd.norm();
    if (na == 0.0 || nb == 0.0)
        throw DataError("undefined similarity: zero-norm vector");
    return ad.dot(bd) / (na * nb);
}

struct QueryResult {
    int id = 0;
    SliceWord word;
    double score = 0.0;
    std::uint64_t count = 0;
};

// Exhaustive scan over the input vectors, sorted by descending cosine with
// ties broken by ascending id. Zero-norm candidates are skipped.
std::vector<QueryResult> nearest_neighbors(const EmbeddingModel& model, int query, int top_n,
                                           bool exclude_self = true);

// Binary model file, version S2V1: little-endian u32 {V, n, window,
// negatives}, u64 seed, f32 initial_lr, vocabulary entries (u16 pitch count,
// pitches as u8, u64 count) in id order, then the input and output matrices
// as row-major f32. load(save(m)) is byte-identical.
void save_model(const EmbeddingModel& model, std::ostream& out);
void save_model_file(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(std::istream& in);
EmbeddingModel load_model_file(const std::string& path);

}  // namespace s2v
