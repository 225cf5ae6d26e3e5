#pragma once

#include <string>

#include "json.hpp"

#include "minegap/core.hpp"
#include "minegap/engine.hpp"
#include "minegap/eval.hpp"
#include "minegap/simworld.hpp"

namespace minegap {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const PromptCandidate& c);
nlohmann::json to_json(const BiasBreakdown& b);
nlohmann::json to_json(const ScoredPrompt& sp, bool include_payload = true);
nlohmann::json to_json(const IterationRecord& rec);
nlohmann::json to_json(const MiningConfig& cfg);
nlohmann::json to_json(const MiningManifest& m);
nlohmann::json to_json(const MiningResult& result);
nlohmann::json to_json(const ScoreSummary& s);

MiningConfig mining_config_from_json(const nlohmann::json& j);
SimVocabulary sim_vocabulary_from_json(const nlohmann::json& j);

// One backend suite assembled from the config file's "backends" block.
// Sim blocks share the simworld parameters; http blocks carry endpoints.
struct RunConfig {
    MiningConfig mining;
    nlohmann::json backends;  // raw block, resolved lazily per run seed
    std::string output_dir = "out";
    bool verbose = false;
};

RunConfig load_run_config(const std::string& path);

bool run_config_is_sim(const RunConfig& cfg);
SimVocabulary run_config_sim_vocabulary(const RunConfig& cfg);

// Builds the three services. run_seed feeds the sim text generator; it is
// ignored by HTTP backends.
BackendSuite build_backend_suite(const RunConfig& cfg, std::uint64_t run_seed);

CategorySet category_set_from_json(const nlohmann::json& j);

}  // namespace minegap
