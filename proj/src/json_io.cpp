#include "minegap/json_io.hpp"

#include <fstream>

namespace minegap {

using nlohmann::json;

json to_json(const PromptCandidate& c) {
    json j{
        {"id", c.id},
        {"text", c.text},
        {"provenance", to_string(c.provenance)},
        {"iteration", c.iteration},
    };
    if (c.parent_id) j["parent_id"] = *c.parent_id;
    return j;
}

json to_json(const BiasBreakdown& b) {
    return json{
        {"missed_concepts_score", b.missed_concepts_score},
        {"least_aligned_score", b.least_aligned_score},
        {"mean_similarity", b.mean_similarity},
        {"bias", b.bias},
        {"k", b.k},
        {"missed_variation_indices", b.missed_variation_indices},
        {"least_aligned_image_indices", b.least_aligned_image_indices},
    };
}

json to_json(const ScoredPrompt& sp, bool include_payload) {
    json j{
        {"candidate", to_json(sp.candidate)},
        {"score", sp.score},
    };
    if (sp.breakdown) j["breakdown"] = to_json(*sp.breakdown);
    if (include_payload) {
        j["variation_texts"] = sp.variation_texts;
        j["image_refs"] = sp.image_refs;
    }
    return j;
}

json to_json(const IterationRecord& rec) {
    json population = json::array();
    for (const auto& sp : rec.population) population.push_back(to_json(sp, false));
    return json{
        {"iteration", rec.iteration},
        {"population", population},
        {"selected_ids", rec.selected_ids},
        {"injected_random_count", rec.injected_random_count},
    };
}

json to_json(const MiningConfig& cfg) {
    return json{
        {"b", cfg.b},
        {"s", cfg.s},
        {"m", cfg.m},
        {"K", cfg.K},
        {"iterations", cfg.iterations},
        {"N", cfg.N},
        {"alpha", cfg.alpha},
        {"max_words", cfg.max_words},
        {"seed_list", cfg.seed_list},
        {"mean_guard", cfg.mean_guard},
        {"llm_retries", cfg.llm_retries},
        {"parallelism", cfg.parallelism},
    };
}

json to_json(const MiningManifest& m) {
    return json{
        {"backend_identity", m.backend_identity},
        {"objective_name", m.objective_name},
        {"run_seed", m.run_seed},
        {"started_at", m.started_at},
        {"finished_at", m.finished_at},
    };
}

json to_json(const MiningResult& result) {
    json ledger = json::array();
    for (const auto& sp : result.ledger.entries()) ledger.push_back(to_json(sp));
    json history = json::array();
    for (const auto& rec : result.history) history.push_back(to_json(rec));
    return json{
        {"ledger", ledger},
        {"history", history},
        {"manifest", to_json(result.manifest)},
    };
}

json to_json(const ScoreSummary& s) {
    return json{
        {"min", s.min},   {"q1", s.q1},     {"median", s.median}, {"q3", s.q3},
        {"mean", s.mean}, {"count", s.count}, {"scores", s.scores}, {"errors", s.errors},
    };
}

MiningConfig mining_config_from_json(const json& j) {
    MiningConfig cfg;
    try {
        if (j.contains("b")) cfg.b = j.at("b").get<std::size_t>();
        if (j.contains("s")) cfg.s = j.at("s").get<std::size_t>();
        if (j.contains("m")) cfg.m = j.at("m").get<std::size_t>();
        if (j.contains("K")) cfg.K = j.at("K").get<std::size_t>();
        if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<std::size_t>();
        if (j.contains("N")) cfg.N = j.at("N").get<std::size_t>();
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("max_words")) cfg.max_words = j.at("max_words").get<std::size_t>();
        if (j.contains("mean_guard")) cfg.mean_guard = j.at("mean_guard").get<double>();
        if (j.contains("llm_retries")) cfg.llm_retries = j.at("llm_retries").get<std::size_t>();
        if (j.contains("parallelism")) cfg.parallelism = j.at("parallelism").get<std::size_t>();
        if (j.contains("seed_list")) {
            cfg.seed_list = j.at("seed_list").get<std::vector<std::uint64_t>>();
        } else {
            cfg.seed_list.resize(cfg.N);
            for (std::size_t i = 0; i < cfg.N; ++i) cfg.seed_list[i] = i;
        }
        cfg.validate();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid mining config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid mining config: ") + e.what());
    }
    return cfg;
}

SimVocabulary sim_vocabulary_from_json(const json& j) {
    try {
        SimVocabulary v = SimVocabulary::standard(
            j.value("tokens", 50), j.value("attributes", 32), j.value("global_seed", 0));
        if (j.contains("token_list")) v.tokens = j.at("token_list").get<std::vector<std::string>>();
        if (j.contains("attribute_list"))
            v.attribute_tokens = j.at("attribute_list").get<std::vector<std::string>>();
        v.dimension = j.value("dimension", 64);
        v.prompt_length = j.value("prompt_length", 3);
        v.mixing_weight = j.value("mixing_weight", 0.8);
        v.noise_scale = j.value("noise_scale", 0.05);
        if (j.contains("diversity_overrides"))
            v.diversity_overrides =
                j.at("diversity_overrides").get<std::map<std::string, double>>();
        v.validate();
        return v;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid sim block: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid sim block: ") + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.mining = mining_config_from_json(j.value("mining", json::object()));
    if (!j.contains("backends")) throw ConfigError("config missing \"backends\" block");
    cfg.backends = j.at("backends");
    if (j.contains("output")) {
        cfg.output_dir = j.at("output").value("directory", cfg.output_dir);
        cfg.verbose = j.at("output").value("verbose", false);
    }
    return cfg;
}

namespace {

std::string service_type(const json& backends, const std::string& role) {
    if (!backends.contains(role))
        throw ConfigError("backends block missing role: " + role);
    return backends.at(role).value("type", "sim");
}

}  // namespace

bool run_config_is_sim(const RunConfig& cfg) {
    return service_type(cfg.backends, "text") == "sim" &&
           service_type(cfg.backends, "image") == "sim" &&
           service_type(cfg.backends, "embedder") == "sim";
}

SimVocabulary run_config_sim_vocabulary(const RunConfig& cfg) {
    return sim_vocabulary_from_json(cfg.backends.value("sim", json::object()));
}

BackendSuite build_backend_suite(const RunConfig& cfg, std::uint64_t run_seed) {
    BackendSuite suite;
    const json& b = cfg.backends;

    SimVocabulary vocab;
    const bool any_sim = service_type(b, "text") == "sim" ||
                         service_type(b, "image") == "sim" ||
                         service_type(b, "embedder") == "sim";
    if (any_sim) vocab = run_config_sim_vocabulary(cfg);

    try {
        const json& text = b.at("text");
        if (service_type(b, "text") == "sim") {
            suite.text_gen = sim_text_generator(vocab, run_seed);
        } else {
            HttpTextGeneratorConfig tc;
            tc.endpoint = text.at("endpoint").get<std::string>();
            tc.path = text.value("path", tc.path);
            tc.model = text.value("model", "");
            tc.api_key_env = text.value("api_key_env", "");
            tc.retries = text.value("retries", cfg.mining.llm_retries);
            tc.templates = text.contains("template_dir")
                               ? load_meta_prompts(text.at("template_dir").get<std::string>())
                               : default_meta_prompts();
            suite.text_gen = make_http_text_generator(tc);
        }

        const json& image = b.at("image");
        if (service_type(b, "image") == "sim") {
            suite.image_gen = sim_image_generator(vocab);
        } else {
            HttpImageGeneratorConfig ic;
            ic.endpoint = image.at("endpoint").get<std::string>();
            ic.path = image.value("path", ic.path);
            ic.model = image.value("model", "");
            ic.api_key_env = image.value("api_key_env", "");
            ic.cache_dir = image.value("cache_dir", "image-cache");
            suite.image_gen = make_http_image_generator(ic);
        }
        if (image.contains("params")) {
            const json& p = image.at("params");
            suite.params.guidance_scale = p.value("guidance_scale", suite.params.guidance_scale);
            suite.params.width = p.value("width", suite.params.width);
            suite.params.height = p.value("height", suite.params.height);
        }

        const json& emb = b.at("embedder");
        if (service_type(b, "embedder") == "sim") {
            suite.embedder = sim_embedder(vocab);
        } else {
            HttpEmbedderConfig ec;
            ec.endpoint = emb.at("endpoint").get<std::string>();
            ec.path = emb.value("path", ec.path);
            ec.model = emb.value("model", "");
            ec.api_key_env = emb.value("api_key_env", "");
            ec.dimension = emb.value("dimension", 0);
            suite.embedder = make_http_embedder(ec);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid backends block: ") + e.what());
    }
    return suite;
}

CategorySet category_set_from_json(const json& j) {
    CategorySet out;
    try {
        for (const auto& [name, terms] : j.items()) {
            auto list = terms.get<std::vector<std::string>>();
            if (list.empty()) throw ConfigError("category has no terms: " + name);
            out.categories[name] = std::move(list);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid category file: ") + e.what());
    }
    return out;
}

}  // namespace minegap
