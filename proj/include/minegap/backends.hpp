#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "minegap/score.hpp"

namespace minegap {

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Opaque image handle: either a file path (HTTP backend cache) or an
// in-memory embedding (simworld).
struct ImageRef {
    std::string id;
    std::string path;
    std::optional<EmbeddingVector> data;
};

struct GenerationParams {
    double guidance_scale = 1.0;
    std::size_t width = 512;
    std::size_t height = 512;
};

class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    virtual std::vector<std::string> random_prompts(std::size_t n) = 0;
    virtual std::vector<std::string> mutations(const std::string& prompt, std::size_t n) = 0;
    virtual std::vector<std::string> variations(const std::string& prompt, std::size_t n) = 0;
    virtual std::string identity() const = 0;
};

class ImageGenerator {
public:
    virtual ~ImageGenerator() = default;
    virtual ImageRef generate(const std::string& prompt, std::uint64_t seed,
                              const GenerationParams& params) = 0;
    virtual std::string identity() const = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed_text(const std::string& text) = 0;
    virtual EmbeddingVector embed_image(const ImageRef& image) = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string identity() const = 0;
};

struct BackendSuite {
    std::shared_ptr<TextGenerator> text_gen;
    std::shared_ptr<ImageGenerator> image_gen;
    std::shared_ptr<Embedder> embedder;
    GenerationParams params;

    std::string identity() const;
};

enum class TemplateKind { Random, Mutation, Variation, System };

struct MetaPromptTemplate {
    TemplateKind kind = TemplateKind::Random;
    std::string body;
};

struct MetaPromptSet {
    MetaPromptTemplate system;
    MetaPromptTemplate random;
    MetaPromptTemplate mutation;
    MetaPromptTemplate variation;
};

struct RenderedPrompt {
    std::string system;
    std::string user;
};

// The default meta-prompt set shipped with the tool.
const MetaPromptSet& default_meta_prompts();

// Loads one template per kind from <dir>/{system,random,mutation,variation}.txt.
MetaPromptSet load_meta_prompts(const std::string& dir);

// Substitutes the <N> and <prompt> placeholders (U+27E8/U+27E9 brackets).
RenderedPrompt render_meta_prompt(const MetaPromptSet& set, TemplateKind kind, std::size_t n,
                                  const std::optional<std::string>& prompt = std::nullopt);

// Parses a bracketed, double-quoted list as emitted by the meta-prompts.
// Tolerates prose around the brackets; items may not contain quotes or
// newlines; requires exactly expected_n nonempty items.
std::vector<std::string> parse_prompt_list(const std::string& raw, std::size_t expected_n);

std::string serialize_prompt_list(const std::vector<std::string>& items);

// Retries `op` up to `attempts` total tries, sleeping backoff between tries.
template <typename Op>
auto with_retry(Op&& op, std::size_t attempts,
                std::chrono::milliseconds backoff = std::chrono::milliseconds(0))
    -> decltype(op()) {
    if (attempts < 1) throw std::invalid_argument("with_retry: attempts must be >= 1");
    for (std::size_t attempt = 1;; ++attempt) {
        try {
            return op();
        } catch (const std::exception&) {
            if (attempt >= attempts) throw;
            if (backoff.count() > 0) std::this_thread::sleep_for(backoff * attempt);
        }
    }
}

struct HttpTextGeneratorConfig {
    std::string endpoint;          // e.g. http://host:port
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;       // name of the env var holding the key
    MetaPromptSet templates;
    std::size_t retries = 3;
    std::chrono::milliseconds backoff{250};
};

std::shared_ptr<TextGenerator> make_http_text_generator(const HttpTextGeneratorConfig& cfg);

struct HttpImageGeneratorConfig {
    std::string endpoint;
    std::string path = "/generate";
    std::string model;
    std::string api_key_env;
    std::string cache_dir;  // content-addressed image cache root
    std::size_t retries = 3;
    std::chrono::milliseconds backoff{250};
};

std::shared_ptr<ImageGenerator> make_http_image_generator(const HttpImageGeneratorConfig& cfg);

struct HttpEmbedderConfig {
    std::string endpoint;
    std::string path = "/embed";
    std::string model;
    std::string api_key_env;
    std::size_t dimension = 0;  // 0 = trust the service
    std::size_t retries = 3;
    std::chrono::milliseconds backoff{250};
};

std::shared_ptr<Embedder> make_http_embedder(const HttpEmbedderConfig& cfg);

std::string sha256_hex(const std::string& data);

}  // namespace minegap
