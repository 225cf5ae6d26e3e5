// Python bindings for the main operations: scoring, ranking metrics,
// prompt-list parsing, the simulated world, and full mining runs.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "minegap/backends.hpp"
#include "minegap/engine.hpp"
#include "minegap/eval.hpp"
#include "minegap/json_io.hpp"
#include "minegap/score.hpp"
#include "minegap/simworld.hpp"

namespace py = pybind11;
using namespace minegap;

namespace {

SimVocabulary make_vocab(std::size_t tokens, std::size_t attributes, std::uint64_t global_seed,
                         std::size_t prompt_length,
                         const std::map<std::string, double>& diversity_overrides) {
    SimVocabulary v = SimVocabulary::standard(tokens, attributes, global_seed);
    v.prompt_length = prompt_length;
    v.diversity_overrides = diversity_overrides;
    v.validate();
    return v;
}

py::dict breakdown_dict(const BiasBreakdown& b) {
    py::dict d;
    d["missed_concepts_score"] = b.missed_concepts_score;
    d["least_aligned_score"] = b.least_aligned_score;
    d["mean_similarity"] = b.mean_similarity;
    d["bias"] = b.bias;
    d["k"] = b.k;
    d["missed_variation_indices"] = b.missed_variation_indices;
    d["least_aligned_image_indices"] = b.least_aligned_image_indices;
    return d;
}

py::dict scored_dict(const ScoredPrompt& sp) {
    py::dict d;
    d["id"] = sp.candidate.id;
    d["text"] = sp.candidate.text;
    d["provenance"] = to_string(sp.candidate.provenance);
    d["iteration"] = sp.candidate.iteration;
    d["score"] = sp.score;
    if (sp.breakdown) d["breakdown"] = breakdown_dict(*sp.breakdown);
    d["variation_texts"] = sp.variation_texts;
    return d;
}

}  // namespace

PYBIND11_MODULE(_minegap, m) {
    m.doc() = "prompt-mining engine for text-to-image bias discovery";

    py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    // --- scoring ---
    m.def(
        "bias_score",
        [](const std::vector<std::vector<double>>& matrix, double alpha, double mean_guard) {
            const std::size_t n = matrix.size();
            std::vector<double> flat;
            flat.reserve(n * n);
            for (const auto& row : matrix) {
                if (row.size() != n)
                    throw std::invalid_argument("similarity matrix must be square");
                flat.insert(flat.end(), row.begin(), row.end());
            }
            return breakdown_dict(bias_score(SimilarityMatrix(n, std::move(flat)), alpha,
                                             mean_guard));
        },
        py::arg("matrix"), py::arg("alpha") = 25.0, py::arg("mean_guard") = 1e-6,
        "Bias score of a square similarity matrix (rows: variations, cols: images). "
        "Lower means more biased.");
    m.def("cosine_similarity", &cosine_similarity, py::arg("u"), py::arg("v"));
    m.def("percentile_index", &percentile_index, py::arg("n"), py::arg("alpha"),
          "1-based order-statistic index for the lower alpha-th percentile.");
    m.def("kth_smallest", &kth_smallest, py::arg("values"), py::arg("k"));
    m.def("mse_objective", &mse_objective, py::arg("generated"), py::arg("target"));
    m.def(
        "build_similarity_matrix",
        [](const std::vector<EmbeddingVector>& texts, const std::vector<EmbeddingVector>& images) {
            const SimilarityMatrix S = build_similarity_matrix(texts, images);
            std::vector<std::vector<double>> out(S.size(), std::vector<double>(S.size()));
            for (std::size_t i = 0; i < S.size(); ++i)
                for (std::size_t j = 0; j < S.size(); ++j) out[i][j] = S.at(i, j);
            return out;
        },
        py::arg("text_embeddings"), py::arg("image_embeddings"));

    // --- core helpers ---
    m.def("derive_random_count", &derive_random_count, py::arg("b"), py::arg("s"), py::arg("m"));
    m.def("normalize_prompt_key", &normalize_prompt_key, py::arg("text"));
    m.def("count_words", &count_words, py::arg("text"));
    m.def("parse_prompt_list", &parse_prompt_list, py::arg("raw"), py::arg("expected_count"),
          "Parse an LLM reply formatted as a quoted, bracketed prompt list.");

    // --- ranking metrics / categories ---
    m.def("pearson_r", &pearson_r, py::arg("x"), py::arg("y"));
    m.def("spearman_rho", &spearman_rho, py::arg("x"), py::arg("y"));
    m.def(
        "assign_categories",
        [](const std::string& prompt, const std::vector<std::string>& missed_concepts,
           const std::map<std::string, std::vector<std::string>>& categories) {
            CategorySet set;
            set.categories = categories;
            const auto hit = assign_categories(prompt, missed_concepts, set);
            return std::vector<std::string>(hit.begin(), hit.end());
        },
        py::arg("prompt"), py::arg("missed_concepts"), py::arg("categories"));

    // --- simulated world ---
    m.def("sim_token_vector", &token_vector, py::arg("token"), py::arg("global_seed"),
          py::arg("dimension"));
    m.def(
        "sim_score_prompt",
        [](const std::string& prompt, std::size_t tokens, std::size_t attributes,
           std::uint64_t global_seed, std::uint64_t run_seed, std::size_t n,
           const std::map<std::string, double>& diversity_overrides) {
            const SimVocabulary vocab = make_vocab(tokens, attributes, global_seed, 3,
                                                   diversity_overrides);
            MiningConfig cfg;
            cfg.N = n;
            cfg.seed_list.resize(n);
            for (std::size_t i = 0; i < n; ++i) cfg.seed_list[i] = i;
            PromptCandidate c;
            c.id = 0;
            c.text = prompt;
            return scored_dict(evaluate_bias(c, sim_backend_suite(vocab, run_seed), cfg));
        },
        py::arg("prompt"), py::arg("tokens") = 50, py::arg("attributes") = 32,
        py::arg("global_seed") = 0, py::arg("run_seed") = 0, py::arg("n") = 15,
        py::arg("diversity_overrides") = std::map<std::string, double>{},
        "Bias-score one prompt against the deterministic simulated backends.");
    m.def(
        "sim_mine",
        [](std::uint64_t run_seed, std::size_t tokens, std::size_t attributes,
           std::uint64_t global_seed, std::size_t prompt_length,
           const std::map<std::string, double>& diversity_overrides, std::size_t b, std::size_t s,
           std::size_t mut, std::size_t k, std::size_t iterations, std::size_t n,
           std::size_t parallelism) {
            const SimVocabulary vocab =
                make_vocab(tokens, attributes, global_seed, prompt_length, diversity_overrides);
            MiningConfig cfg;
            cfg.b = b;
            cfg.s = s;
            cfg.m = mut;
            cfg.K = k;
            cfg.iterations = iterations;
            cfg.N = n;
            cfg.seed_list.resize(n);
            for (std::size_t i = 0; i < n; ++i) cfg.seed_list[i] = i;
            cfg.parallelism = parallelism;
            cfg.validate();
            MiningEngine engine(cfg, sim_backend_suite(vocab, run_seed), bias_objective());
            const MiningResult res = engine.run(run_seed);

            py::list top_k, history;
            for (const auto& sp : res.ledger.entries()) top_k.append(scored_dict(sp));
            for (const auto& rec : res.history) {
                py::list population;
                for (const auto& sp : rec.population) population.append(scored_dict(sp));
                py::dict r;
                r["iteration"] = rec.iteration;
                r["population"] = population;
                r["selected_ids"] = rec.selected_ids;
                r["injected_random_count"] = rec.injected_random_count;
                history.append(r);
            }
            py::dict out;
            out["top_k"] = top_k;
            out["history"] = history;
            out["backend_identity"] = res.manifest.backend_identity;
            out["objective_name"] = res.manifest.objective_name;
            out["run_seed"] = res.manifest.run_seed;
            return out;
        },
        py::arg("run_seed") = 0, py::arg("tokens") = 50, py::arg("attributes") = 32,
        py::arg("global_seed") = 0, py::arg("prompt_length") = 3,
        py::arg("diversity_overrides") = std::map<std::string, double>{}, py::arg("b") = 15,
        py::arg("s") = 5, py::arg("m") = 2, py::arg("k") = 5, py::arg("iterations") = 25,
        py::arg("n") = 15, py::arg("parallelism") = 1,
        "Run a full genetic mining loop in the simulated world.");
}
