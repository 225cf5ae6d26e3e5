#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include <openssl/evp.h>

#include "httplib.h"
#include "json.hpp"

#include "minegap/backends.hpp"

namespace minegap {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

namespace {

std::string api_key_from_env(const std::string& var) {
    if (var.empty()) return {};
    const char* value = std::getenv(var.c_str());
    return value ? value : "";
}

httplib::Headers auth_headers(const std::string& api_key_env) {
    httplib::Headers headers;
    const std::string key = api_key_from_env(api_key_env);
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
    return headers;
}

json post_json(const std::string& endpoint, const std::string& path, const json& body,
               const std::string& api_key_env) {
    httplib::Client client(endpoint);
    client.set_read_timeout(120, 0);
    auto res = client.Post(path, auth_headers(api_key_env), body.dump(), "application/json");
    if (!res)
        throw BackendError("request to " + endpoint + path + " failed: " +
                           httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw BackendError("request to " + endpoint + path + " returned status " +
                           std::to_string(res->status));
    return json::parse(res->body);
}

std::string base64_decode(const std::string& in) {
    std::string out;
    out.resize(3 * (in.size() / 4) + 3);
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(in.data()),
                                  static_cast<int>(in.size()));
    if (n < 0) throw BackendError("invalid base64 image payload");
    std::size_t len = static_cast<std::size_t>(n);
    // EVP_DecodeBlock ignores '=' padding in the length it reports.
    for (auto it = in.rbegin(); it != in.rend() && *it == '='; ++it) --len;
    out.resize(len);
    return out;
}

// Chat-completions style client driven by the meta-prompt templates.
class HttpTextGenerator final : public TextGenerator {
public:
    explicit HttpTextGenerator(HttpTextGeneratorConfig cfg) : cfg_(std::move(cfg)) {}

    std::vector<std::string> random_prompts(std::size_t n) override {
        return request(TemplateKind::Random, n, std::nullopt);
    }
    std::vector<std::string> mutations(const std::string& prompt, std::size_t n) override {
        return request(TemplateKind::Mutation, n, prompt);
    }
    std::vector<std::string> variations(const std::string& prompt, std::size_t n) override {
        return request(TemplateKind::Variation, n, prompt);
    }
    std::string identity() const override { return "http-text:" + cfg_.model; }

private:
    std::vector<std::string> request(TemplateKind kind, std::size_t n,
                                     const std::optional<std::string>& prompt) {
        const RenderedPrompt rendered = render_meta_prompt(cfg_.templates, kind, n, prompt);
        return with_retry(
            [&] {
                const json body = {
                    {"model", cfg_.model},
                    {"messages",
                     {{{"role", "system"}, {"content", rendered.system}},
                      {{"role", "user"}, {"content", rendered.user}}}},
                };
                const json reply = post_json(cfg_.endpoint, cfg_.path, body, cfg_.api_key_env);
                const std::string text =
                    reply.at("choices").at(0).at("message").at("content").get<std::string>();
                return parse_prompt_list(text, n);
            },
            cfg_.retries, cfg_.backoff);
    }

    HttpTextGeneratorConfig cfg_;
};

// Image client with a content-addressed file cache: key = SHA-256 of the
// request JSON, layout <cache_dir>/<backend-id>/<sha256>.png (+ sidecar).
class HttpImageGenerator final : public ImageGenerator {
public:
    explicit HttpImageGenerator(HttpImageGeneratorConfig cfg) : cfg_(std::move(cfg)) {}

    ImageRef generate(const std::string& prompt, std::uint64_t seed,
                      const GenerationParams& params) override {
        const json request = {
            {"prompt", prompt},         {"seed", seed},
            {"guidance_scale", params.guidance_scale},
            {"width", params.width},    {"height", params.height},
            {"model", cfg_.model},
        };
        const std::string key = sha256_hex(request.dump());
        const fs::path dir = fs::path(cfg_.cache_dir) / sanitized_identity();
        const fs::path png = dir / (key + ".png");

        ImageRef ref;
        ref.id = key;
        ref.path = png.string();
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (fs::exists(png)) return ref;
        }

        const std::string bytes = with_retry(
            [&] {
                const json reply = post_json(cfg_.endpoint, cfg_.path, request, cfg_.api_key_env);
                return base64_decode(reply.at("image").get<std::string>());
            },
            cfg_.retries, cfg_.backoff);

        std::lock_guard<std::mutex> lock(mutex_);
        if (!fs::exists(png)) {
            fs::create_directories(dir);
            write_atomic(png, bytes);
            write_atomic(dir / (key + ".json"), request.dump(2));
        }
        return ref;
    }

    std::string identity() const override { return "http-image:" + cfg_.model; }

private:
    std::string sanitized_identity() const {
        std::string id = identity();
        for (char& c : id)
            if (c == '/' || c == ':') c = '_';
        return id;
    }

    static void write_atomic(const fs::path& target, const std::string& bytes) {
        const fs::path tmp = target.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw BackendError("failed to write cache file: " + tmp.string());
        }
        fs::rename(tmp, target);
    }

    HttpImageGeneratorConfig cfg_;
    std::mutex mutex_;
};

class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(HttpEmbedderConfig cfg) : cfg_(std::move(cfg)) {}

    EmbeddingVector embed_text(const std::string& text) override {
        return request({{"kind", "text"}, {"payload", text}, {"model", cfg_.model}});
    }

    EmbeddingVector embed_image(const ImageRef& image) override {
        std::ifstream in(image.path, std::ios::binary);
        if (!in) throw BackendError("cannot read image file: " + image.path);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string bytes = buf.str();
        std::string b64;
        b64.resize(4 * ((bytes.size() + 2) / 3) + 1);
        const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(b64.data()),
                                      reinterpret_cast<const unsigned char*>(bytes.data()),
                                      static_cast<int>(bytes.size()));
        b64.resize(static_cast<std::size_t>(n));
        return request({{"kind", "image"}, {"payload", b64}, {"model", cfg_.model}});
    }

    std::size_t dimension() const override { return cfg_.dimension; }
    std::string identity() const override { return "http-embed:" + cfg_.model; }

private:
    EmbeddingVector request(const json& body) {
        return with_retry(
            [&] {
                const json reply = post_json(cfg_.endpoint, cfg_.path, body, cfg_.api_key_env);
                auto vec = reply.at("vector").get<std::vector<double>>();
                if (cfg_.dimension != 0 && vec.size() != cfg_.dimension)
                    throw BackendError("embedder returned wrong dimension");
                return vec;
            },
            cfg_.retries, cfg_.backoff);
    }

    HttpEmbedderConfig cfg_;
};

}  // namespace

std::shared_ptr<TextGenerator> make_http_text_generator(const HttpTextGeneratorConfig& cfg) {
    return std::make_shared<HttpTextGenerator>(cfg);
}

std::shared_ptr<ImageGenerator> make_http_image_generator(const HttpImageGeneratorConfig& cfg) {
    return std::make_shared<HttpImageGenerator>(cfg);
}

std::shared_ptr<Embedder> make_http_embedder(const HttpEmbedderConfig& cfg) {
    return std::make_shared<HttpEmbedder>(cfg);
}

}  // namespace minegap
