#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace minegap {

// Where a candidate came from.
enum class Provenance { Initial, Random, Mutation };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct PromptCandidate {
    std::uint64_t id = 0;
    std::string text;
    Provenance provenance = Provenance::Initial;
    std::optional<std::uint64_t> parent_id;  // set iff provenance == Mutation
    std::uint32_t iteration = 0;

    void validate(std::size_t max_words = 0) const;
};

struct MiningConfig {
    std::size_t b = 15;           // population size
    std::size_t s = 5;            // selected per iteration
    std::size_t m = 2;            // mutations per selected prompt
    std::size_t K = 5;            // ledger capacity
    std::size_t iterations = 25;
    std::size_t N = 15;           // images / variations per evaluation
    double alpha = 25.0;          // percentile
    std::size_t max_words = 8;    // 0 disables the word limit
    std::vector<std::uint64_t> seed_list;  // |seed_list| == N
    double mean_guard = 1e-6;
    std::size_t llm_retries = 3;
    std::size_t parallelism = 1;

    MiningConfig();  // fills seed_list with 0..N-1

    void validate() const;
};

struct BiasBreakdown {
    double missed_concepts_score = 0.0;
    double least_aligned_score = 0.0;
    double mean_similarity = 0.0;
    double bias = 0.0;
    std::size_t k = 0;
    std::vector<std::size_t> missed_variation_indices;
    std::vector<std::size_t> least_aligned_image_indices;
};

struct ScoredPrompt {
    PromptCandidate candidate;
    double score = 0.0;  // lower = more biased
    std::optional<BiasBreakdown> breakdown;
    std::vector<std::string> variation_texts;
    std::vector<std::string> image_refs;
};

// r = b - s*m random candidates injected per iteration.
std::size_t derive_random_count(std::size_t b, std::size_t s, std::size_t m);

// Case-folded, interior whitespace collapsed, trimmed. Dedupe key for
// ledgers and generation batches.
std::string normalize_prompt_key(const std::string& text);

std::size_t count_words(const std::string& text);

// Global best-K prompts across the whole run, deduplicated by
// normalized text, sorted ascending by score (ties keep insertion order).
class TopKLedger {
public:
    explicit TopKLedger(std::size_t capacity);

    // Inserts / replaces / ignores per the ledger contract. Returns true
    // if the ledger changed.
    bool update(const ScoredPrompt& item);

    const std::vector<ScoredPrompt>& entries() const { return entries_; }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    double best_score() const;

private:
    std::size_t capacity_;
    std::vector<ScoredPrompt> entries_;  // ascending by score
};

struct IterationRecord {
    std::uint32_t iteration = 0;
    std::vector<ScoredPrompt> population;
    std::vector<std::uint64_t> selected_ids;
    std::size_t injected_random_count = 0;
};

}  // namespace minegap
