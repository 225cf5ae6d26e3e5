#include "minegap/objective.hpp"

#include <stdexcept>

#include "minegap/score.hpp"

namespace minegap {

ScoredPrompt evaluate_bias(const PromptCandidate& candidate, const BackendSuite& backends,
                           const MiningConfig& config) {
    if (!backends.text_gen || !backends.image_gen || !backends.embedder)
        throw BackendError("bias objective requires all three backend services");
    const std::size_t n = config.N;

    const std::vector<std::string> variations =
        backends.text_gen->variations(candidate.text, n);
    if (variations.size() != n)
        throw BackendError("text generator returned " + std::to_string(variations.size()) +
                           " variations, expected " + std::to_string(n));

    std::vector<ImageRef> images;
    images.reserve(n);
    for (std::uint64_t seed : config.seed_list)
        images.push_back(backends.image_gen->generate(candidate.text, seed, backends.params));

    std::vector<EmbeddingVector> text_embs, image_embs;
    text_embs.reserve(n);
    image_embs.reserve(n);
    for (const auto& v : variations) text_embs.push_back(backends.embedder->embed_text(v));
    for (const auto& img : images) image_embs.push_back(backends.embedder->embed_image(img));

    const SimilarityMatrix S = build_similarity_matrix(text_embs, image_embs);
    const BiasBreakdown breakdown = bias_score(S, config.alpha, config.mean_guard);

    ScoredPrompt out;
    out.candidate = candidate;
    out.score = breakdown.bias;
    out.breakdown = breakdown;
    out.variation_texts = variations;
    for (const auto& img : images)
        out.image_refs.push_back(img.path.empty() ? img.id : img.path);
    return out;
}

namespace {

class BiasObjective final : public Objective {
public:
    ScoredPrompt evaluate(const PromptCandidate& candidate, const BackendSuite& backends,
                          const MiningConfig& config) const override {
        return evaluate_bias(candidate, backends, config);
    }
    std::string name() const override { return "bias"; }
};

}  // namespace

std::shared_ptr<Objective> bias_objective() { return std::make_shared<BiasObjective>(); }

}  // namespace minegap
