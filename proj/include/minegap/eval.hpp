#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "minegap/backends.hpp"
#include "minegap/core.hpp"
#include "minegap/objective.hpp"

namespace minegap {

struct RankingPair {
    std::vector<std::string> labels;
    std::vector<double> reference_ranks;     // rank 1 = most biased
    std::vector<double> candidate_scores;    // lower = more biased

    void validate() const;
};

struct CategorySet {
    std::map<std::string, std::vector<std::string>> categories;  // name -> lowercase terms
};

// Average ranks (ties share the mean rank), then Pearson on the ranks.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

double pearson_r(const std::vector<double>& x, const std::vector<double>& y);

double validate_ranking(const RankingPair& pair);

struct ScoreSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
    std::vector<double> scores;          // per-prompt, prompt order
    std::vector<std::string> errors;     // per-prompt failure messages
};

ScoreSummary summarize_scores(const std::vector<double>& scores);

// Rows: evaluating model; columns: prompt-set source model.
using CrossEvalMatrix =
    std::map<std::string, std::map<std::string, ScoreSummary>>;

CrossEvalMatrix cross_eval(const std::map<std::string, std::vector<std::string>>& prompt_sets,
                           const std::map<std::string, BackendSuite>& backends,
                           const MiningConfig& config);

// Sweeps the image generator's guidance scale; variations per prompt are
// generated once and reused across all values.
std::map<double, std::vector<double>> guidance_sweep(const std::vector<std::string>& prompts,
                                                     const BackendSuite& backend,
                                                     const std::vector<double>& values,
                                                     const MiningConfig& config);

// A category fires iff some missed-concept string contains (whole-word,
// case-insensitive) a term of that category which is absent from the
// original prompt.
std::set<std::string> assign_categories(const std::string& prompt,
                                        const std::vector<std::string>& missed_concepts,
                                        const CategorySet& categories);

}  // namespace minegap
