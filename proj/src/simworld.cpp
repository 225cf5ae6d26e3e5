#include "minegap/simworld.hpp"

#include "minegap/score.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace minegap {

namespace {

// FNV-1a over the token bytes mixed with the seed. std::hash is not
// guaranteed stable across platforms, so roll the hash by hand.
std::uint64_t stable_hash(const std::string& text, std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t h = 14695981039346656037ull ^ salt;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    h ^= seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 1099511628211ull;
    return h;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; std::normal_distribution output is implementation-defined.
double gaussian(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

EmbeddingVector gaussian_vector(std::uint64_t seed, std::size_t dimension) {
    std::mt19937_64 rng(seed);
    EmbeddingVector v(dimension);
    for (double& x : v) x = gaussian(rng);
    return v;
}

void normalize(EmbeddingVector& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::logic_error("cannot normalize zero vector");
    for (double& x : v) x /= norm;
}

std::vector<std::string> split_tokens(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

void SimVocabulary::validate(std::size_t min_attributes) const {
    if (tokens.size() < 2) throw std::invalid_argument("simworld needs at least 2 tokens");
    if (attribute_tokens.size() < min_attributes)
        throw std::invalid_argument("simworld has too few attribute tokens");
    if (dimension < 2) throw std::invalid_argument("simworld dimension must be >= 2");
    std::set<std::string> seen(tokens.begin(), tokens.end());
    if (seen.size() != tokens.size()) throw std::invalid_argument("duplicate vocabulary token");
    for (const auto& a : attribute_tokens)
        if (!seen.insert(a).second)
            throw std::invalid_argument("attribute tokens must be disjoint from tokens");
}

double SimVocabulary::diversity(const std::string& token) const {
    auto it = diversity_overrides.find(token);
    if (it != diversity_overrides.end()) return it->second;
    std::mt19937_64 rng(stable_hash(token, global_seed, /*salt=*/0xd1));
    return uniform01(rng);
}

double SimVocabulary::prompt_diversity(const std::string& prompt) const {
    const auto toks = split_tokens(prompt);
    if (toks.empty()) throw std::invalid_argument("empty prompt");
    double d = 1.0;
    for (const auto& t : toks) d = std::min(d, diversity(t));
    return d;
}

SimVocabulary SimVocabulary::standard(std::size_t n_tokens, std::size_t n_attributes,
                                      std::uint64_t global_seed) {
    SimVocabulary v;
    v.global_seed = global_seed;
    v.tokens.reserve(n_tokens);
    for (std::size_t i = 0; i < n_tokens; ++i) v.tokens.push_back("tok" + std::to_string(i));
    v.attribute_tokens.reserve(n_attributes);
    for (std::size_t i = 0; i < n_attributes; ++i)
        v.attribute_tokens.push_back("attr" + std::to_string(i));
    return v;
}

EmbeddingVector token_vector(const std::string& token, std::uint64_t global_seed,
                             std::size_t dimension) {
    if (dimension < 2) throw std::invalid_argument("token_vector: dimension must be >= 2");
    EmbeddingVector v = gaussian_vector(stable_hash(token, global_seed, /*salt=*/0x7e), dimension);
    normalize(v);
    return v;
}

namespace {

EmbeddingVector prompt_vector(const SimVocabulary& vocab, const std::string& prompt) {
    const auto toks = split_tokens(prompt);
    if (toks.empty()) throw std::invalid_argument("empty prompt");
    EmbeddingVector mean(vocab.dimension, 0.0);
    for (const auto& t : toks) {
        const EmbeddingVector tv = token_vector(t, vocab.global_seed, vocab.dimension);
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += tv[d];
    }
    normalize(mean);
    return mean;
}

class SimTextGenerator final : public TextGenerator {
public:
    SimTextGenerator(SimVocabulary vocab, std::uint64_t run_seed)
        : vocab_(std::move(vocab)), rng_(stable_hash("sim-text", run_seed, 0x51)) {
        vocab_.validate();
    }

    std::vector<std::string> random_prompts(std::size_t n) override {
        std::vector<std::string> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::ostringstream p;
            for (std::size_t j = 0; j < vocab_.prompt_length; ++j) {
                if (j) p << ' ';
                p << vocab_.tokens[rng_() % vocab_.tokens.size()];
            }
            out.push_back(p.str());
        }
        return out;
    }

    std::vector<std::string> mutations(const std::string& prompt, std::size_t n) override {
        const auto toks = split_tokens(prompt);
        if (toks.empty()) throw std::invalid_argument("cannot mutate an empty prompt");
        std::vector<std::string> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto mutated = toks;
            const std::size_t pos = rng_() % mutated.size();
            std::string replacement;
            do {
                replacement = vocab_.tokens[rng_() % vocab_.tokens.size()];
            } while (replacement == mutated[pos]);
            mutated[pos] = replacement;
            std::ostringstream p;
            for (std::size_t j = 0; j < mutated.size(); ++j) {
                if (j) p << ' ';
                p << mutated[j];
            }
            out.push_back(p.str());
        }
        return out;
    }

    std::vector<std::string> variations(const std::string& prompt, std::size_t n) override {
        if (n > vocab_.attribute_tokens.size())
            throw BackendError("simworld: requested more variations than attribute tokens");
        std::vector<std::string> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(prompt + " " + vocab_.attribute_tokens[i]);
        return out;
    }

    std::string identity() const override { return "sim-text"; }

private:
    SimVocabulary vocab_;
    std::mt19937_64 rng_;
};

class SimImageGenerator final : public ImageGenerator {
public:
    explicit SimImageGenerator(SimVocabulary vocab) : vocab_(std::move(vocab)) {
        vocab_.validate();
    }

    // image = normalize(p_vec + delta*w*attr_vec(seed) + noise_scale*g(seed));
    // guidance_scale > 1 shrinks the effective diversity, mirroring how
    // stronger guidance trades diversity for fidelity.
    ImageRef generate(const std::string& prompt, std::uint64_t seed,
                      const GenerationParams& params) override {
        const double guard = std::max(params.guidance_scale, 1e-9);
        const double delta = std::clamp(vocab_.prompt_diversity(prompt) / guard, 0.0, 1.0);

        EmbeddingVector v = prompt_vector(vocab_, prompt);
        const std::string& attr =
            vocab_.attribute_tokens[seed % vocab_.attribute_tokens.size()];
        const EmbeddingVector av = token_vector(attr, vocab_.global_seed, vocab_.dimension);
        const double w = delta * vocab_.mixing_weight;
        for (std::size_t d = 0; d < v.size(); ++d) v[d] += w * av[d];

        if (vocab_.noise_scale > 0.0) {
            const EmbeddingVector g =
                gaussian_vector(stable_hash(prompt, seed ^ vocab_.global_seed, 0x93),
                                vocab_.dimension);
            for (std::size_t d = 0; d < v.size(); ++d) v[d] += vocab_.noise_scale * g[d];
        }
        normalize(v);

        ImageRef ref;
        ref.id = "sim:" + prompt + ":" + std::to_string(seed);
        ref.data = std::move(v);
        return ref;
    }

    std::string identity() const override { return "sim-image"; }

private:
    SimVocabulary vocab_;
};

class SimEmbedder final : public Embedder {
public:
    explicit SimEmbedder(SimVocabulary vocab) : vocab_(std::move(vocab)) {
        vocab_.validate();
        for (const auto& t : vocab_.tokens) known_.insert(t);
        for (const auto& t : vocab_.attribute_tokens) known_.insert(t);
    }

    EmbeddingVector embed_text(const std::string& text) override {
        for (const auto& t : split_tokens(text))
            if (!known_.count(t)) throw BackendError("simworld embedder: unknown token: " + t);
        return prompt_vector(vocab_, text);
    }

    EmbeddingVector embed_image(const ImageRef& image) override {
        if (!image.data)
            throw BackendError("simworld embedder: image ref carries no embedding data");
        return *image.data;
    }

    std::size_t dimension() const override { return vocab_.dimension; }
    std::string identity() const override { return "sim-embed"; }

private:
    SimVocabulary vocab_;
    std::set<std::string> known_;
};

class ColorTaskObjective final : public Objective {
public:
    ColorTaskObjective(std::string target_token, SimVocabulary vocab)
        : target_token_(std::move(target_token)), vocab_(std::move(vocab)) {
        if (std::find(vocab_.tokens.begin(), vocab_.tokens.end(), target_token_) ==
            vocab_.tokens.end())
            throw std::invalid_argument("target token not in vocabulary: " + target_token_);
        target_ = token_vector(target_token_, vocab_.global_seed, vocab_.dimension);
    }

    ScoredPrompt evaluate(const PromptCandidate& candidate, const BackendSuite& backends,
                          const MiningConfig& config) const override {
        double loss = 0.0;
        ScoredPrompt out;
        out.candidate = candidate;
        for (std::uint64_t seed : config.seed_list) {
            const ImageRef img =
                backends.image_gen->generate(candidate.text, seed, backends.params);
            loss += mse_objective(backends.embedder->embed_image(img), target_);
            out.image_refs.push_back(img.path.empty() ? img.id : img.path);
        }
        out.score = loss / static_cast<double>(config.seed_list.size());
        return out;
    }

    std::string name() const override { return "color:" + target_token_; }

private:
    std::string target_token_;
    SimVocabulary vocab_;
    EmbeddingVector target_;
};

}  // namespace

std::shared_ptr<Objective> color_task_objective(const std::string& target_token,
                                                const SimVocabulary& vocab) {
    return std::make_shared<ColorTaskObjective>(target_token, vocab);
}

std::shared_ptr<TextGenerator> sim_text_generator(const SimVocabulary& vocab,
                                                  std::uint64_t run_seed) {
    return std::make_shared<SimTextGenerator>(vocab, run_seed);
}

std::shared_ptr<ImageGenerator> sim_image_generator(const SimVocabulary& vocab) {
    return std::make_shared<SimImageGenerator>(vocab);
}

std::shared_ptr<Embedder> sim_embedder(const SimVocabulary& vocab) {
    return std::make_shared<SimEmbedder>(vocab);
}

BackendSuite sim_backend_suite(const SimVocabulary& vocab, std::uint64_t run_seed) {
    BackendSuite suite;
    suite.text_gen = sim_text_generator(vocab, run_seed);
    suite.image_gen = sim_image_generator(vocab);
    suite.embedder = sim_embedder(vocab);
    return suite;
}

}  // namespace minegap
