#pragma once

#include <memory>
#include <string>

#include "minegap/backends.hpp"
#include "minegap/core.hpp"

namespace minegap {

// The mining loop is independent of the loss being minimized; anything
// that can score a candidate plugs in here. Lower scores are better.
class Objective {
public:
    virtual ~Objective() = default;
    virtual ScoredPrompt evaluate(const PromptCandidate& candidate, const BackendSuite& backends,
                                  const MiningConfig& config) const = 0;
    virtual std::string name() const = 0;
};

// Scores a candidate with the bias objective: N variations vs N generated
// images compared in the shared embedding space.
ScoredPrompt evaluate_bias(const PromptCandidate& candidate, const BackendSuite& backends,
                           const MiningConfig& config);

std::shared_ptr<Objective> bias_objective();

}  // namespace minegap
