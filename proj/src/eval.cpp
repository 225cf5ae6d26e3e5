#include "minegap/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "minegap/score.hpp"

namespace minegap {

void RankingPair::validate() const {
    if (labels.size() != reference_ranks.size() || labels.size() != candidate_scores.size())
        throw std::invalid_argument("ranking pair: length mismatch");
    if (labels.size() < 2) throw std::invalid_argument("ranking pair: need at least 2 items");
}

namespace {

void check_pair(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
    if (x.size() < 2) throw std::invalid_argument("need at least 2 values");
    auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
    };
    if (constant(x) || constant(y))
        throw std::invalid_argument("correlation undefined for constant input");
}

// Average ranks, 1-based; ties get the mean of their rank range.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    check_pair(x, y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    check_pair(x, y);
    return pearson_r(average_ranks(x), average_ranks(y));
}

double validate_ranking(const RankingPair& pair) {
    pair.validate();
    return spearman_rho(pair.candidate_scores, pair.reference_ranks);
}

ScoreSummary summarize_scores(const std::vector<double>& scores) {
    ScoreSummary out;
    out.scores = scores;
    std::vector<double> finite;
    for (double s : scores)
        if (std::isfinite(s)) finite.push_back(s);
    out.count = finite.size();
    if (finite.empty()) return out;
    std::sort(finite.begin(), finite.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(finite.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
        return finite[lo] + (pos - static_cast<double>(lo)) * (finite[hi] - finite[lo]);
    };
    out.min = finite.front();
    out.q1 = quantile(0.25);
    out.median = quantile(0.5);
    out.q3 = quantile(0.75);
    out.mean = std::accumulate(finite.begin(), finite.end(), 0.0) /
               static_cast<double>(finite.size());
    return out;
}

namespace {

ScoredPrompt evaluate_prompt(const std::string& text, const BackendSuite& suite,
                             const MiningConfig& config) {
    PromptCandidate c;
    c.id = 0;
    c.text = text;
    return evaluate_bias(c, suite, config);
}

}  // namespace

CrossEvalMatrix cross_eval(const std::map<std::string, std::vector<std::string>>& prompt_sets,
                           const std::map<std::string, BackendSuite>& backends,
                           const MiningConfig& config) {
    for (const auto& [model, _] : prompt_sets)
        if (!backends.count(model))
            throw std::invalid_argument("no backend configured for model: " + model);

    CrossEvalMatrix matrix;
    for (const auto& [evaluator, suite] : backends) {
        for (const auto& [source, prompts] : prompt_sets) {
            std::vector<double> scores;
            ScoreSummary cell;
            for (const auto& prompt : prompts) {
                try {
                    scores.push_back(evaluate_prompt(prompt, suite, config).score);
                } catch (const std::exception& e) {
                    scores.push_back(std::numeric_limits<double>::quiet_NaN());
                    cell.errors.push_back(prompt + ": " + e.what());
                }
            }
            auto summary = summarize_scores(scores);
            summary.errors = std::move(cell.errors);
            matrix[evaluator][source] = std::move(summary);
        }
    }
    return matrix;
}

std::map<double, std::vector<double>> guidance_sweep(const std::vector<std::string>& prompts,
                                                     const BackendSuite& backend,
                                                     const std::vector<double>& values,
                                                     const MiningConfig& config) {
    if (values.empty()) throw std::invalid_argument("guidance_sweep: no guidance values");

    // Variations once per prompt, reused across every guidance value.
    std::vector<std::vector<std::string>> variation_sets;
    std::vector<std::vector<EmbeddingVector>> text_emb_sets;
    variation_sets.reserve(prompts.size());
    for (const auto& prompt : prompts) {
        auto vars = backend.text_gen->variations(prompt, config.N);
        if (vars.size() != config.N) throw BackendError("variation count mismatch");
        std::vector<EmbeddingVector> embs;
        embs.reserve(vars.size());
        for (const auto& v : vars) embs.push_back(backend.embedder->embed_text(v));
        variation_sets.push_back(std::move(vars));
        text_emb_sets.push_back(std::move(embs));
    }

    std::map<double, std::vector<double>> out;
    for (double value : values) {
        GenerationParams params = backend.params;
        params.guidance_scale = value;
        std::vector<double> scores;
        scores.reserve(prompts.size());
        for (std::size_t p = 0; p < prompts.size(); ++p) {
            std::vector<EmbeddingVector> image_embs;
            image_embs.reserve(config.seed_list.size());
            for (std::uint64_t seed : config.seed_list) {
                const ImageRef img = backend.image_gen->generate(prompts[p], seed, params);
                image_embs.push_back(backend.embedder->embed_image(img));
            }
            const SimilarityMatrix S = build_similarity_matrix(text_emb_sets[p], image_embs);
            scores.push_back(bias_score(S, config.alpha, config.mean_guard).bias);
        }
        out[value] = std::move(scores);
    }
    return out;
}

namespace {

std::vector<std::string> word_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Whole-word containment; multi-word terms match as a contiguous window.
bool contains_term(const std::vector<std::string>& haystack, const std::string& term) {
    const std::vector<std::string> needle = word_tokens(term);
    if (needle.empty() || haystack.size() < needle.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < needle.size(); ++j)
            if (haystack[i + j] != needle[j]) { match = false; break; }
        if (match) return true;
    }
    return false;
}

}  // namespace

std::set<std::string> assign_categories(const std::string& prompt,
                                        const std::vector<std::string>& missed_concepts,
                                        const CategorySet& categories) {
    const std::vector<std::string> prompt_tokens = word_tokens(prompt);
    std::vector<std::vector<std::string>> concept_tokens;
    concept_tokens.reserve(missed_concepts.size());
    for (const auto& c : missed_concepts) concept_tokens.push_back(word_tokens(c));

    std::set<std::string> assigned;
    for (const auto& [name, terms] : categories.categories) {
        for (const auto& term : terms) {
            if (contains_term(prompt_tokens, term)) continue;  // absence clause
            bool hit = false;
            for (const auto& toks : concept_tokens)
                if (contains_term(toks, term)) { hit = true; break; }
            if (hit) {
                assigned.insert(name);
                break;
            }
        }
    }
    return assigned;
}

}  // namespace minegap
