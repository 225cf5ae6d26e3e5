#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "minegap/score.hpp"
#include "minegap/simworld.hpp"

using namespace minegap;

namespace {

double norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<std::string> tokens_of(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

// Bias of one prompt under a given vocabulary, fixed seeds.
double sim_bias(const SimVocabulary& vocab, const std::string& prompt, std::size_t n = 15) {
    auto text = sim_text_generator(vocab, 0);
    auto image = sim_image_generator(vocab);
    auto embed = sim_embedder(vocab);
    const auto variations = text->variations(prompt, n);
    std::vector<EmbeddingVector> text_embs, image_embs;
    for (const auto& v : variations) text_embs.push_back(embed->embed_text(v));
    for (std::size_t seed = 0; seed < n; ++seed)
        image_embs.push_back(embed->embed_image(image->generate(prompt, seed, GenerationParams{})));
    return bias_score(build_similarity_matrix(text_embs, image_embs), 25).bias;
}

}  // namespace

TEST_CASE("token vectors are unit, deterministic, seed sensitive") {
    const EmbeddingVector a = token_vector("dog", 0, 64);
    CHECK(norm(a) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(token_vector("dog", 0, 64) == a);
    CHECK(token_vector("dog", 1, 64) != a);
    CHECK(token_vector("cat", 0, 64) != a);
    CHECK_THROWS(token_vector("dog", 0, 1));
}

TEST_CASE("sim text generator contracts") {
    const SimVocabulary vocab = SimVocabulary::standard();
    auto gen = sim_text_generator(vocab, 0);

    const auto randoms = gen->random_prompts(15);
    CHECK(randoms.size() == 15);
    for (const auto& p : randoms) CHECK(tokens_of(p).size() == vocab.prompt_length);

    const auto vars = gen->variations("tok0 tok1", 3);
    REQUIRE(vars.size() == 3);
    std::set<std::string> suffixes;
    for (const auto& v : vars) {
        const auto toks = tokens_of(v);
        REQUIRE(toks.size() == 3);
        CHECK(toks[0] == "tok0");
        CHECK(toks[1] == "tok1");
        suffixes.insert(toks[2]);
    }
    CHECK(suffixes.size() == 3);  // distinct attribute suffixes
    CHECK_THROWS(gen->variations("tok0", vocab.attribute_tokens.size() + 1));

    const auto muts = gen->mutations("tok0 tok1 tok2", 5);
    REQUIRE(muts.size() == 5);
    for (const auto& m : muts) {
        const auto toks = tokens_of(m);
        REQUIRE(toks.size() == 3);
        int diffs = 0;
        const std::vector<std::string> parent{"tok0", "tok1", "tok2"};
        for (std::size_t i = 0; i < 3; ++i)
            if (toks[i] != parent[i]) ++diffs;
        CHECK(diffs == 1);
    }
}

TEST_CASE("sim text generator is reproducible per run seed") {
    const SimVocabulary vocab = SimVocabulary::standard();
    auto a = sim_text_generator(vocab, 7);
    auto b = sim_text_generator(vocab, 7);
    CHECK(a->random_prompts(10) == b->random_prompts(10));
    auto c = sim_text_generator(vocab, 8);
    CHECK(a->random_prompts(10) != c->random_prompts(10));
}

TEST_CASE("sim image generator formula edges") {
    SimVocabulary vocab = SimVocabulary::standard();
    vocab.noise_scale = 0.0;
    vocab.diversity_overrides["tok0"] = 0.0;
    auto image = sim_image_generator(vocab);
    auto embed = sim_embedder(vocab);

    SUBCASE("zero diversity collapses all images onto the prompt vector") {
        EmbeddingVector first;
        for (std::size_t seed = 0; seed < 8; ++seed) {
            const auto v = embed->embed_image(image->generate("tok0 tok1", seed, GenerationParams{}));
            if (seed == 0)
                first = v;
            else
                CHECK(cosine_similarity(first, v) == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(cosine_similarity(first, embed->embed_text("tok0 tok1")) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("full diversity mixes in the matching attribute vector") {
        SimVocabulary v2 = vocab;
        v2.diversity_overrides["tok0"] = 1.0;
        v2.diversity_overrides["tok1"] = 1.0;
        v2.mixing_weight = 1.0;
        auto image2 = sim_image_generator(v2);
        const auto img = sim_embedder(v2)->embed_image(
            image2->generate("tok0 tok1", 2, GenerationParams{}));
        // Expect collinearity with normalize(p_vec + attr_vec(2)).
        EmbeddingVector expected = sim_embedder(v2)->embed_text("tok0 tok1");
        const EmbeddingVector attr = token_vector(v2.attribute_tokens[2], v2.global_seed, 64);
        for (std::size_t d = 0; d < expected.size(); ++d) expected[d] += attr[d];
        CHECK(cosine_similarity(img, expected) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("embedder contracts") {
    const SimVocabulary vocab = SimVocabulary::standard();
    auto embed = sim_embedder(vocab);
    CHECK(embed->dimension() == 64);
    CHECK(embed->embed_text("tok3") == token_vector("tok3", 0, 64));
    CHECK_THROWS_AS(embed->embed_text("unknownword"), BackendError);

    auto image = sim_image_generator(vocab);
    const ImageRef ref = image->generate("tok0 tok1 tok2", 4, GenerationParams{});
    CHECK(embed->embed_image(ref) == *ref.data);
    CHECK_THROWS_AS(embed->embed_image(ImageRef{"x", "nonexistent", std::nullopt}), BackendError);
}

TEST_CASE("planted zero diversity scores lower than full diversity") {
    SimVocabulary low = SimVocabulary::standard();
    low.diversity_overrides = {{"tok0", 0.0}, {"tok1", 0.0}, {"tok2", 0.0}};
    SimVocabulary high = SimVocabulary::standard();
    high.diversity_overrides = {{"tok0", 1.0}, {"tok1", 1.0}, {"tok2", 1.0}};
    CHECK(sim_bias(low, "tok0 tok1 tok2") < sim_bias(high, "tok0 tok1 tok2"));
}

TEST_CASE("bias is nondecreasing along the diversity grid") {
    const std::string prompt = "tok0 tok1 tok2";
    double prev = -1e300;
    for (double delta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        SimVocabulary vocab = SimVocabulary::standard();
        vocab.diversity_overrides = {{"tok0", delta}, {"tok1", delta}, {"tok2", delta}};
        const double bias = sim_bias(vocab, prompt);
        CHECK(bias > prev);
        prev = bias;
    }
}

TEST_CASE("guidance scale shrinks effective diversity") {
    SimVocabulary vocab = SimVocabulary::standard();
    vocab.diversity_overrides = {{"tok0", 1.0}, {"tok1", 1.0}, {"tok2", 1.0}};
    auto image = sim_image_generator(vocab);
    auto embed = sim_embedder(vocab);
    GenerationParams weak, strong;
    weak.guidance_scale = 1.0;
    strong.guidance_scale = 8.0;
    // Stronger guidance pulls images toward the bare prompt vector.
    const EmbeddingVector p = embed->embed_text("tok0 tok1 tok2");
    const auto weak_img = embed->embed_image(image->generate("tok0 tok1 tok2", 0, weak));
    const auto strong_img = embed->embed_image(image->generate("tok0 tok1 tok2", 0, strong));
    CHECK(cosine_similarity(strong_img, p) > cosine_similarity(weak_img, p));
}

TEST_CASE("color objective hand cases") {
    SimVocabulary vocab = SimVocabulary::standard();
    vocab.noise_scale = 0.0;
    vocab.prompt_length = 1;
    vocab.diversity_overrides["tok0"] = 0.0;
    vocab.diversity_overrides["tok1"] = 0.0;

    MiningConfig cfg;
    cfg.N = 4;
    cfg.seed_list = {0, 1, 2, 3};
    BackendSuite suite = sim_backend_suite(vocab, 0);

    auto target = color_task_objective("tok0", vocab);
    PromptCandidate c;
    c.id = 1;

    c.text = "tok0";  // exact match, no noise, no attribute mixing
    CHECK(target->evaluate(c, suite, cfg).score == doctest::Approx(0.0).epsilon(1e-12));

    c.text = "tok1";  // some other unit vector u: loss = |u - t|^2 / D
    const double expected =
        mse_objective(token_vector("tok1", 0, 64), token_vector("tok0", 0, 64));
    CHECK(target->evaluate(c, suite, cfg).score == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS(color_task_objective("not a token", vocab));
}

TEST_CASE("color loss favors prompts containing the target token") {
    SimVocabulary vocab = SimVocabulary::standard();
    MiningConfig cfg;
    cfg.N = 8;
    cfg.seed_list = {0, 1, 2, 3, 4, 5, 6, 7};
    BackendSuite suite = sim_backend_suite(vocab, 0);
    auto obj = color_task_objective("tok0", vocab);

    PromptCandidate with, without;
    with.id = 1;
    with.text = "tok0 tok5 tok9";
    without.id = 2;
    without.text = "tok3 tok5 tok9";
    CHECK(obj->evaluate(with, suite, cfg).score < obj->evaluate(without, suite, cfg).score);
}
