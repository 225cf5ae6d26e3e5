#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "minegap/backends.hpp"
#include "minegap/core.hpp"
#include "minegap/objective.hpp"

namespace minegap {

struct MiningManifest {
    std::string backend_identity;
    std::string objective_name;
    std::uint64_t run_seed = 0;
    std::string started_at;
    std::string finished_at;
};

struct MiningResult {
    TopKLedger ledger{1};
    std::vector<IterationRecord> history;
    MiningManifest manifest;
};

// Fatal backend failure mid-run; carries whatever history was collected.
class MiningAbort : public BackendError {
public:
    MiningAbort(const std::string& what, MiningResult partial)
        : BackendError(what), partial_(std::move(partial)) {}
    const MiningResult& partial() const { return partial_; }

private:
    MiningResult partial_;
};

// Builds exactly n candidates distinct by normalized key; over-long,
// empty, or duplicate generator outputs are replaced via regeneration
// (bounded by config.llm_retries extra rounds).
std::vector<PromptCandidate> initialize_population(TextGenerator& text_gen,
                                                   const MiningConfig& config,
                                                   std::uint64_t& next_id);

// The s lowest scores; ties broken by smaller candidate id.
std::vector<ScoredPrompt> select(const std::vector<ScoredPrompt>& scored, std::size_t s);

// m mutation candidates per selected prompt, parent links set,
// deduplicated per parent batch.
std::vector<PromptCandidate> mutate(TextGenerator& text_gen,
                                    const std::vector<ScoredPrompt>& selected, std::size_t m,
                                    std::uint32_t iteration, const MiningConfig& config,
                                    std::uint64_t& next_id);

class MiningEngine {
public:
    MiningEngine(MiningConfig config, BackendSuite backends, std::shared_ptr<Objective> objective);

    // Observer invoked after each iteration's record is final.
    void set_iteration_callback(std::function<void(const IterationRecord&)> cb) {
        on_iteration_ = std::move(cb);
    }

    MiningResult run(std::uint64_t run_seed = 0);

    // Evaluates a population, consulting the score cache. Candidates whose
    // evaluation fails (after backend retries) score +infinity.
    std::vector<ScoredPrompt> evaluate_population(const std::vector<PromptCandidate>& population);

private:
    std::vector<PromptCandidate> next_population(const std::vector<ScoredPrompt>& selected,
                                                 std::uint32_t iteration);
    std::string cache_key(const PromptCandidate& candidate) const;

    MiningConfig config_;
    BackendSuite backends_;
    std::shared_ptr<Objective> objective_;
    std::function<void(const IterationRecord&)> on_iteration_;
    std::map<std::string, ScoredPrompt> score_cache_;
    std::uint64_t next_id_ = 1;
};

}  // namespace minegap
