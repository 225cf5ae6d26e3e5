#pragma once

#include <cstddef>
#include <vector>

#include "minegap/core.hpp"

namespace minegap {

using EmbeddingVector = std::vector<double>;

// Square N x N matrix; rows index text variations, columns index images.
class SimilarityMatrix {
public:
    SimilarityMatrix(std::size_t n, std::vector<double> entries);

    std::size_t size() const { return n_; }
    double at(std::size_t row, std::size_t col) const { return data_[row * n_ + col]; }
    const std::vector<double>& entries() const { return data_; }

private:
    std::size_t n_;
    std::vector<double> data_;
};

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

// Order-statistic index for the lower alpha-th percentile of n values:
// k = max(1, ceil(alpha * n / 100)), 1-based.
std::size_t percentile_index(std::size_t n, double alpha);

double kth_smallest(const std::vector<double>& values, std::size_t k);

SimilarityMatrix build_similarity_matrix(const std::vector<EmbeddingVector>& text_embs,
                                         const std::vector<EmbeddingVector>& image_embs);

// The bias objective: mean of the two lower-percentile order statistics of
// the row/column maxima, normalized by the mean of all entries. Lower means
// more biased. Throws when the matrix mean is at or below mean_guard.
BiasBreakdown bias_score(const SimilarityMatrix& S, double alpha, double mean_guard = 1e-6);

double mse_objective(const EmbeddingVector& generated, const EmbeddingVector& target);

}  // namespace minegap
