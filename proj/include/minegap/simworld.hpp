#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "minegap/backends.hpp"
#include "minegap/objective.hpp"

namespace minegap {

// Deterministic stand-in world for the three backend services. Token
// embeddings, image noise, and per-token diversity are all pure functions
// of (inputs, global_seed), so whole mining runs are reproducible.
struct SimVocabulary {
    std::vector<std::string> tokens;
    std::vector<std::string> attribute_tokens;  // disjoint from tokens
    std::size_t dimension = 64;
    std::uint64_t global_seed = 0;
    std::map<std::string, double> diversity_overrides;  // token -> d in [0,1]

    std::size_t prompt_length = 3;   // tokens per random prompt
    double mixing_weight = 0.8;      // attribute mixing weight w
    double noise_scale = 0.05;

    void validate(std::size_t min_attributes = 1) const;

    // Per-token diversity: override if present, else deterministic
    // uniform draw from (token, global_seed).
    double diversity(const std::string& token) const;

    // min over the prompt's tokens; one collapsing token collapses the
    // whole output distribution.
    double prompt_diversity(const std::string& prompt) const;

    // Standard small world: T sequential nouns, A attribute tokens.
    static SimVocabulary standard(std::size_t n_tokens = 50, std::size_t n_attributes = 32,
                                  std::uint64_t global_seed = 0);
};

// Unit-norm Gaussian direction drawn from a PRNG seeded by (token, seed).
EmbeddingVector token_vector(const std::string& token, std::uint64_t global_seed,
                             std::size_t dimension);

// Stateful: random_prompts/mutations consume the generator's RNG stream;
// variations are pure (fixed attribute order).
std::shared_ptr<TextGenerator> sim_text_generator(const SimVocabulary& vocab,
                                                  std::uint64_t run_seed);

std::shared_ptr<ImageGenerator> sim_image_generator(const SimVocabulary& vocab);

std::shared_ptr<Embedder> sim_embedder(const SimVocabulary& vocab);

BackendSuite sim_backend_suite(const SimVocabulary& vocab, std::uint64_t run_seed);

// Color-task analog: score = mean squared error between each generated
// sim-image and the target token's embedding, averaged over the N seeds.
std::shared_ptr<Objective> color_task_objective(const std::string& target_token,
                                                const SimVocabulary& vocab);

}  // namespace minegap
