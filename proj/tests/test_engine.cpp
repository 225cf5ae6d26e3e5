#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <limits>
#include <set>

#include "minegap/engine.hpp"
#include "minegap/json_io.hpp"
#include "minegap/simworld.hpp"

using namespace minegap;

namespace {

MiningConfig small_config() {
    MiningConfig cfg;
    cfg.b = 9;
    cfg.s = 3;
    cfg.m = 2;
    cfg.K = 3;
    cfg.iterations = 5;
    cfg.N = 6;
    cfg.seed_list = {0, 1, 2, 3, 4, 5};
    cfg.max_words = 8;
    cfg.llm_retries = 6;
    return cfg;
}

// Scripted generator for error-path tests.
class ScriptedTextGenerator final : public TextGenerator {
public:
    std::vector<std::vector<std::string>> script;
    std::size_t cursor = 0;

    std::vector<std::string> random_prompts(std::size_t) override { return next(); }
    std::vector<std::string> mutations(const std::string&, std::size_t) override { return next(); }
    std::vector<std::string> variations(const std::string&, std::size_t) override { return next(); }
    std::string identity() const override { return "scripted"; }

private:
    std::vector<std::string> next() {
        if (cursor >= script.size()) return {};
        return script[cursor++];
    }
};

}  // namespace

TEST_CASE("initialize_population returns b distinct valid candidates") {
    const SimVocabulary vocab = SimVocabulary::standard();
    auto gen = sim_text_generator(vocab, 0);
    MiningConfig cfg = small_config();
    std::uint64_t next_id = 1;
    const auto pop = initialize_population(*gen, cfg, next_id);
    REQUIRE(pop.size() == cfg.b);
    std::set<std::string> keys;
    for (const auto& c : pop) {
        CHECK(c.provenance == Provenance::Initial);
        CHECK(c.iteration == 0);
        CHECK(count_words(c.text) <= cfg.max_words);
        keys.insert(normalize_prompt_key(c.text));
    }
    CHECK(keys.size() == cfg.b);
}

TEST_CASE("initialize_population regenerates around invalid and duplicate outputs") {
    ScriptedTextGenerator gen;
    gen.script = {
        {"a b", "a b", "this one is far too long to pass the word limit check"},
        {"c d", "e f"},
    };
    MiningConfig cfg = small_config();
    cfg.b = 3;
    cfg.s = 1;
    cfg.m = 1;
    std::uint64_t next_id = 1;
    const auto pop = initialize_population(gen, cfg, next_id);
    REQUIRE(pop.size() == 3);
    CHECK(pop[0].text == "a b");
    CHECK(pop[1].text == "c d");
    CHECK(pop[2].text == "e f");
}

TEST_CASE("initialize_population fails after exhausting retries") {
    ScriptedTextGenerator gen;  // empty script: always returns nothing
    MiningConfig cfg = small_config();
    cfg.llm_retries = 2;
    std::uint64_t next_id = 1;
    CHECK_THROWS_AS(initialize_population(gen, cfg, next_id), BackendError);
}

TEST_CASE("select takes lowest scores with id tie-break") {
    auto make = [](std::uint64_t id, double score) {
        ScoredPrompt sp;
        sp.candidate.id = id;
        sp.candidate.text = "p" + std::to_string(id);
        sp.score = score;
        return sp;
    };
    const std::vector<ScoredPrompt> pop{make(1, 1.02), make(2, 1.05), make(3, 1.01)};
    const auto top2 = select(pop, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].candidate.id == 3);
    CHECK(top2[1].candidate.id == 1);

    const std::vector<ScoredPrompt> tied{make(5, 1.0), make(2, 1.0), make(9, 2.0)};
    CHECK(select(tied, 1)[0].candidate.id == 2);

    CHECK(select(pop, 3).size() == 3);
    CHECK_THROWS(select(pop, 4));
}

TEST_CASE("mutate links parents and stamps iterations") {
    const SimVocabulary vocab = SimVocabulary::standard();
    auto gen = sim_text_generator(vocab, 1);
    MiningConfig cfg = small_config();
    std::uint64_t next_id = 100;

    std::vector<ScoredPrompt> selected;
    for (int i = 0; i < 3; ++i) {
        ScoredPrompt sp;
        sp.candidate.id = static_cast<std::uint64_t>(i + 1);
        sp.candidate.text = "tok" + std::to_string(3 * i) + " tok" + std::to_string(3 * i + 1);
        sp.score = 1.0;
        selected.push_back(sp);
    }
    const auto muts = mutate(*gen, selected, 2, 4, cfg, next_id);
    REQUIRE(muts.size() == 6);
    for (std::size_t i = 0; i < muts.size(); ++i) {
        CHECK(muts[i].provenance == Provenance::Mutation);
        CHECK(muts[i].iteration == 4);
        REQUIRE(muts[i].parent_id.has_value());
        CHECK(*muts[i].parent_id == selected[i / 2].candidate.id);
        CHECK(normalize_prompt_key(muts[i].text) !=
              normalize_prompt_key(selected[i / 2].candidate.text));
    }
}

TEST_CASE("mining run satisfies the structural invariants") {
    SimVocabulary vocab = SimVocabulary::standard();
    vocab.diversity_overrides = {{"tok0", 0.0}, {"tok1", 0.0}};
    const MiningConfig cfg = small_config();

    MiningEngine engine(cfg, sim_backend_suite(vocab, 3), bias_objective());
    const MiningResult result = engine.run(3);

    REQUIRE(result.history.size() == cfg.iterations);
    double best = std::numeric_limits<double>::infinity();
    double global_min = std::numeric_limits<double>::infinity();
    for (const auto& rec : result.history) {
        CHECK(rec.population.size() == cfg.b);
        CHECK(rec.selected_ids.size() == cfg.s);
        for (const auto& sp : rec.population) {
            if (std::isfinite(sp.score)) global_min = std::min(global_min, sp.score);
        }
        double iter_best = std::numeric_limits<double>::infinity();
        for (const auto& sp : rec.population) iter_best = std::min(iter_best, sp.score);
        best = std::min(best, iter_best);
    }
    CHECK(result.ledger.best_score() == doctest::Approx(global_min));
    CHECK(result.ledger.entries().size() <= cfg.K);

    // Mutation parents come from the previous iteration's selection.
    for (std::size_t i = 1; i < result.history.size(); ++i) {
        const auto& prev = result.history[i - 1];
        const std::set<std::uint64_t> selected(prev.selected_ids.begin(),
                                               prev.selected_ids.end());
        for (const auto& sp : result.history[i].population) {
            if (sp.candidate.provenance == Provenance::Mutation) {
                REQUIRE(sp.candidate.parent_id.has_value());
                CHECK(selected.count(*sp.candidate.parent_id) == 1);
            }
        }
        // Selected prompts themselves do not re-enter the next population.
        for (const auto& sp : result.history[i].population)
            CHECK(selected.count(sp.candidate.id) == 0);
    }
}

TEST_CASE("mining runs are reproducible for a fixed seed") {
    SimVocabulary vocab = SimVocabulary::standard();
    const MiningConfig cfg = small_config();

    MiningEngine a(cfg, sim_backend_suite(vocab, 5), bias_objective());
    MiningEngine b(cfg, sim_backend_suite(vocab, 5), bias_objective());
    const auto ra = a.run(5);
    const auto rb = b.run(5);

    const auto ja = to_json(ra);
    auto jb = to_json(rb);
    // Wall-clock stamps live only in the manifest.
    CHECK(ja.at("ledger") == jb.at("ledger"));
    CHECK(ja.at("history") == jb.at("history"));

    MiningEngine c(cfg, sim_backend_suite(vocab, 6), bias_objective());
    CHECK(to_json(c.run(6)).at("history") != ja.at("history"));
}

TEST_CASE("parallel evaluation matches serial results") {
    SimVocabulary vocab = SimVocabulary::standard();
    MiningConfig cfg = small_config();
    cfg.iterations = 3;

    MiningConfig par = cfg;
    par.parallelism = 4;

    MiningEngine serial(cfg, sim_backend_suite(vocab, 9), bias_objective());
    MiningEngine parallel(par, sim_backend_suite(vocab, 9), bias_objective());
    CHECK(to_json(serial.run(9)).at("history") == to_json(parallel.run(9)).at("history"));
}

TEST_CASE("evaluation failure yields an infinite score instead of aborting") {
    SimVocabulary vocab = SimVocabulary::standard();

    // An objective that rejects one specific prompt.
    class FlakyObjective final : public Objective {
    public:
        explicit FlakyObjective(std::string needle) : needle_(std::move(needle)) {}
        ScoredPrompt evaluate(const PromptCandidate& c, const BackendSuite& b,
                              const MiningConfig& cfg) const override {
            if (c.text == needle_) throw BackendError("injected failure");
            return evaluate_bias(c, b, cfg);
        }
        std::string name() const override { return "flaky"; }

    private:
        std::string needle_;
    };

    MiningConfig cfg = small_config();
    cfg.iterations = 2;
    BackendSuite suite = sim_backend_suite(vocab, 2);
    std::uint64_t next_id = 1;
    auto gen = sim_text_generator(vocab, 2);
    const auto preview = initialize_population(*gen, cfg, next_id);

    MiningEngine engine(cfg, suite, std::make_shared<FlakyObjective>(preview[0].text));
    const MiningResult result = engine.run(2);
    bool saw_infinite = false;
    for (const auto& sp : result.history[0].population)
        if (std::isinf(sp.score)) saw_infinite = true;
    CHECK(saw_infinite);
    for (const auto& sp : result.ledger.entries()) CHECK(std::isfinite(sp.score));
}

TEST_CASE("score cache avoids re-evaluating repeated prompts") {
    SimVocabulary vocab = SimVocabulary::standard();
    std::atomic<int> evaluations{0};

    class CountingObjective final : public Objective {
    public:
        explicit CountingObjective(std::atomic<int>& n) : n_(n) {}
        ScoredPrompt evaluate(const PromptCandidate& c, const BackendSuite& b,
                              const MiningConfig& cfg) const override {
            n_.fetch_add(1);
            return evaluate_bias(c, b, cfg);
        }
        std::string name() const override { return "counting"; }

    private:
        std::atomic<int>& n_;
    };

    MiningConfig cfg = small_config();
    MiningEngine engine(cfg, sim_backend_suite(vocab, 4),
                        std::make_shared<CountingObjective>(evaluations));

    PromptCandidate c;
    c.id = 1;
    c.text = "tok1 tok2";
    const auto first = engine.evaluate_population({c});
    c.id = 2;
    c.text = " TOK1  tok2 ";  // same normalized key
    const auto second = engine.evaluate_population({c});
    CHECK(evaluations.load() == 1);
    CHECK(first[0].score == second[0].score);
    CHECK(second[0].candidate.id == 2);  // identity re-stamped from the query
}

TEST_CASE("evaluate_bias enforces the variation count contract") {
    SimVocabulary vocab = SimVocabulary::standard();
    BackendSuite suite = sim_backend_suite(vocab, 0);

    class ShortTextGen final : public TextGenerator {
    public:
        explicit ShortTextGen(std::shared_ptr<TextGenerator> inner) : inner_(std::move(inner)) {}
        std::vector<std::string> random_prompts(std::size_t n) override {
            return inner_->random_prompts(n);
        }
        std::vector<std::string> mutations(const std::string& p, std::size_t n) override {
            return inner_->mutations(p, n);
        }
        std::vector<std::string> variations(const std::string& p, std::size_t n) override {
            auto v = inner_->variations(p, n);
            v.pop_back();
            return v;
        }
        std::string identity() const override { return "short"; }

    private:
        std::shared_ptr<TextGenerator> inner_;
    };
    suite.text_gen = std::make_shared<ShortTextGen>(suite.text_gen);

    MiningConfig cfg = small_config();
    PromptCandidate c;
    c.id = 1;
    c.text = "tok1 tok2";
    CHECK_THROWS_AS(evaluate_bias(c, suite, cfg), BackendError);
}

TEST_CASE("fatal backend failure aborts with partial history") {
    SimVocabulary vocab = SimVocabulary::standard();

    // Text generator that dies after the first two iterations' worth of calls.
    class DyingTextGen final : public TextGenerator {
    public:
        DyingTextGen(std::shared_ptr<TextGenerator> inner, int budget)
            : inner_(std::move(inner)), budget_(budget) {}
        std::vector<std::string> random_prompts(std::size_t n) override {
            spend();
            return inner_->random_prompts(n);
        }
        std::vector<std::string> mutations(const std::string& p, std::size_t n) override {
            spend();
            return inner_->mutations(p, n);
        }
        std::vector<std::string> variations(const std::string& p, std::size_t n) override {
            return inner_->variations(p, n);
        }
        std::string identity() const override { return "dying"; }

    private:
        void spend() {
            if (budget_-- <= 0) throw BackendError("service went away");
        }
        std::shared_ptr<TextGenerator> inner_;
        int budget_;
    };

    BackendSuite suite = sim_backend_suite(vocab, 0);
    suite.text_gen = std::make_shared<DyingTextGen>(suite.text_gen, 1);

    MiningConfig cfg = small_config();
    MiningEngine engine(cfg, suite, bias_objective());
    try {
        engine.run(0);
        FAIL("expected MiningAbort");
    } catch (const MiningAbort& abort) {
        CHECK(abort.partial().history.size() >= 1);
        CHECK(abort.partial().history.size() < cfg.iterations);
    }
}
