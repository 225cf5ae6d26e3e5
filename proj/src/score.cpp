#include "minegap/score.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace minegap {

namespace {
constexpr double kEntryTolerance = 1e-6;
}

SimilarityMatrix::SimilarityMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), data_(std::move(entries)) {
    if (n_ == 0) throw std::invalid_argument("similarity matrix must be non-empty");
    if (data_.size() != n_ * n_)
        throw std::invalid_argument("similarity matrix entries must be N*N");
    for (double v : data_) {
        if (!std::isfinite(v))
            throw std::invalid_argument("similarity matrix entries must be finite");
        if (v < -1.0 - kEntryTolerance || v > 1.0 + kEntryTolerance)
            throw std::invalid_argument("similarity matrix entry outside [-1, 1]");
    }
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.size() != v.size() || u.empty())
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0)
        throw std::invalid_argument("cosine_similarity: zero-norm vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::size_t percentile_index(std::size_t n, double alpha) {
    if (n < 1) throw std::invalid_argument("percentile_index: n must be >= 1");
    if (alpha < 0.0 || alpha > 100.0)
        throw std::invalid_argument("percentile_index: alpha must be in [0, 100]");
    // Epsilon absorbs binary rounding when alpha*n/100 is an exact integer.
    auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) / 100.0 - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

double kth_smallest(const std::vector<double>& values, std::size_t k) {
    if (values.empty()) throw std::invalid_argument("kth_smallest: empty input");
    if (k < 1 || k > values.size()) throw std::invalid_argument("kth_smallest: k out of range");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("kth_smallest: non-finite value");
    std::vector<double> copy(values);
    std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k - 1), copy.end());
    return copy[k - 1];
}

SimilarityMatrix build_similarity_matrix(const std::vector<EmbeddingVector>& text_embs,
                                         const std::vector<EmbeddingVector>& image_embs) {
    if (text_embs.size() != image_embs.size())
        throw std::invalid_argument("build_similarity_matrix: set sizes differ");
    const std::size_t n = text_embs.size();
    std::vector<double> data(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            data[i * n + j] = cosine_similarity(text_embs[i], image_embs[j]);
    return SimilarityMatrix(n, std::move(data));
}

namespace {

// Indices of the k smallest values, ties broken by lower index.
std::vector<std::size_t> smallest_indices(const std::vector<double>& values, std::size_t k) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    idx.resize(k);
    return idx;
}

}  // namespace

BiasBreakdown bias_score(const SimilarityMatrix& S, double alpha, double mean_guard) {
    const std::size_t n = S.size();
    std::vector<double> row_max(n, -2.0), col_max(n, -2.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = S.at(i, j);
            row_max[i] = std::max(row_max[i], v);
            col_max[j] = std::max(col_max[j], v);
            sum += v;
        }
    }
    const double mean = sum / static_cast<double>(n * n);
    if (mean <= mean_guard)
        throw std::domain_error("bias_score: matrix mean is degenerate, normalization is meaningless");

    BiasBreakdown out;
    out.k = percentile_index(n, alpha);
    out.missed_concepts_score = kth_smallest(row_max, out.k);
    out.least_aligned_score = kth_smallest(col_max, out.k);
    out.mean_similarity = mean;
    out.bias = 0.5 * (out.missed_concepts_score + out.least_aligned_score) / mean;
    out.missed_variation_indices = smallest_indices(row_max, out.k);
    out.least_aligned_image_indices = smallest_indices(col_max, out.k);
    return out;
}

double mse_objective(const EmbeddingVector& generated, const EmbeddingVector& target) {
    if (generated.size() != target.size() || generated.empty())
        throw std::invalid_argument("mse_objective: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const double d = generated[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(generated.size());
}

}  // namespace minegap
