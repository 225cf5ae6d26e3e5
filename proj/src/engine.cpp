#include "minegap/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace minegap {

namespace {

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool candidate_text_valid(const std::string& text, const MiningConfig& config) {
    if (normalize_prompt_key(text).empty()) return false;
    if (config.max_words > 0 && count_words(text) > config.max_words) return false;
    return true;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Fills `accepted` with up to `wanted` texts distinct by normalized key
// (and distinct from `taken`), regenerating shortfalls.
void collect_distinct(const std::function<std::vector<std::string>(std::size_t)>& generate,
                      std::size_t wanted, const MiningConfig& config,
                      std::set<std::string>& taken, std::vector<std::string>& accepted,
                      const std::string& what) {
    const std::size_t max_rounds = config.llm_retries + 1;
    for (std::size_t round = 0; round < max_rounds && accepted.size() < wanted; ++round) {
        const std::size_t shortfall = wanted - accepted.size();
        std::vector<std::string> batch;
        try {
            batch = generate(shortfall);
        } catch (const std::exception& e) {
            if (round + 1 == max_rounds)
                throw BackendError(what + " generation failed: " + e.what());
            continue;
        }
        for (auto& raw : batch) {
            if (accepted.size() >= wanted) break;
            const std::string text = trim(raw);
            if (!candidate_text_valid(text, config)) continue;
            const std::string key = normalize_prompt_key(text);
            if (!taken.insert(key).second) continue;
            accepted.push_back(text);
        }
    }
    if (accepted.size() < wanted)
        throw BackendError("could not assemble " + std::to_string(wanted) + " distinct " + what +
                           " prompts after " + std::to_string(max_rounds) + " rounds");
}

}  // namespace

std::vector<PromptCandidate> initialize_population(TextGenerator& text_gen,
                                                   const MiningConfig& config,
                                                   std::uint64_t& next_id) {
    config.validate();
    std::set<std::string> taken;
    std::vector<std::string> texts;
    collect_distinct([&](std::size_t n) { return text_gen.random_prompts(n); }, config.b, config,
                     taken, texts, "initial");
    std::vector<PromptCandidate> out;
    out.reserve(config.b);
    for (auto& text : texts) {
        PromptCandidate c;
        c.id = next_id++;
        c.text = std::move(text);
        c.provenance = Provenance::Initial;
        c.iteration = 0;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<ScoredPrompt> select(const std::vector<ScoredPrompt>& scored, std::size_t s) {
    if (s > scored.size()) throw std::invalid_argument("select: s exceeds population size");
    std::vector<std::size_t> idx(scored.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scored[a].score != scored[b].score) return scored[a].score < scored[b].score;
        return scored[a].candidate.id < scored[b].candidate.id;
    });
    std::vector<ScoredPrompt> out;
    out.reserve(s);
    for (std::size_t i = 0; i < s; ++i) out.push_back(scored[idx[i]]);
    return out;
}

std::vector<PromptCandidate> mutate(TextGenerator& text_gen,
                                    const std::vector<ScoredPrompt>& selected, std::size_t m,
                                    std::uint32_t iteration, const MiningConfig& config,
                                    std::uint64_t& next_id) {
    if (selected.empty()) throw std::invalid_argument("mutate: no selected prompts");
    std::vector<PromptCandidate> out;
    out.reserve(selected.size() * m);
    for (const auto& parent : selected) {
        std::set<std::string> taken{normalize_prompt_key(parent.candidate.text)};
        std::vector<std::string> texts;
        collect_distinct(
            [&](std::size_t n) { return text_gen.mutations(parent.candidate.text, n); }, m,
            config, taken, texts, "mutation");
        for (auto& text : texts) {
            PromptCandidate c;
            c.id = next_id++;
            c.text = std::move(text);
            c.provenance = Provenance::Mutation;
            c.parent_id = parent.candidate.id;
            c.iteration = iteration;
            out.push_back(std::move(c));
        }
    }
    return out;
}

MiningEngine::MiningEngine(MiningConfig config, BackendSuite backends,
                           std::shared_ptr<Objective> objective)
    : config_(std::move(config)), backends_(std::move(backends)), objective_(std::move(objective)) {
    config_.validate();
    if (!objective_) throw std::invalid_argument("engine requires an objective");
}

std::string MiningEngine::cache_key(const PromptCandidate& candidate) const {
    std::ostringstream key;
    key << backends_.identity() << '|' << objective_->name() << '|'
        << normalize_prompt_key(candidate.text) << '|' << backends_.params.guidance_scale << 'x'
        << backends_.params.width << 'x' << backends_.params.height << '|';
    for (auto s : config_.seed_list) key << s << ',';
    return key.str();
}

std::vector<ScoredPrompt> MiningEngine::evaluate_population(
    const std::vector<PromptCandidate>& population) {
    std::vector<ScoredPrompt> results(population.size());
    std::vector<char> from_cache(population.size(), 0);

    // Cache lookups happen up front, single-threaded.
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < population.size(); ++i) {
        auto hit = score_cache_.find(cache_key(population[i]));
        if (hit != score_cache_.end()) {
            results[i] = hit->second;
            results[i].candidate = population[i];
            from_cache[i] = 1;
        } else {
            pending.push_back(i);
        }
    }

    auto evaluate_one = [&](std::size_t i) {
        try {
            results[i] = objective_->evaluate(population[i], backends_, config_);
        } catch (const std::exception& e) {
            std::cerr << "evaluation failed for \"" << population[i].text << "\": " << e.what()
                      << "\n";
            results[i].candidate = population[i];
            results[i].score = std::numeric_limits<double>::infinity();
        }
    };

    const std::size_t workers = std::min(config_.parallelism, pending.size());
    if (workers <= 1) {
        for (std::size_t i : pending) evaluate_one(i);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t j = cursor.fetch_add(1); j < pending.size();
                     j = cursor.fetch_add(1))
                    evaluate_one(pending[j]);
            });
        }
        for (auto& t : pool) t.join();
    }

    for (std::size_t i : pending)
        if (std::isfinite(results[i].score)) score_cache_[cache_key(population[i])] = results[i];
    (void)from_cache;
    return results;
}

std::vector<PromptCandidate> MiningEngine::next_population(
    const std::vector<ScoredPrompt>& selected, std::uint32_t iteration) {
    std::vector<PromptCandidate> next =
        mutate(*backends_.text_gen, selected, config_.m, iteration, config_, next_id_);
    const std::size_t r = derive_random_count(config_.b, config_.s, config_.m);
    if (r > 0) {
        std::set<std::string> taken;
        std::vector<std::string> texts;
        collect_distinct([&](std::size_t n) { return backends_.text_gen->random_prompts(n); }, r,
                         config_, taken, texts, "random");
        for (auto& text : texts) {
            PromptCandidate c;
            c.id = next_id_++;
            c.text = std::move(text);
            c.provenance = Provenance::Random;
            c.iteration = iteration;
            next.push_back(std::move(c));
        }
    }
    return next;
}

MiningResult MiningEngine::run(std::uint64_t run_seed) {
    MiningResult result;
    result.ledger = TopKLedger(config_.K);
    result.manifest.backend_identity = backends_.identity();
    result.manifest.objective_name = objective_->name();
    result.manifest.run_seed = run_seed;
    result.manifest.started_at = timestamp_utc();

    const std::size_t r = derive_random_count(config_.b, config_.s, config_.m);
    try {
        std::vector<PromptCandidate> population =
            initialize_population(*backends_.text_gen, config_, next_id_);
        std::vector<ScoredPrompt> scored = evaluate_population(population);

        for (std::uint32_t it = 0; it < config_.iterations; ++it) {
            for (const auto& sp : scored)
                if (std::isfinite(sp.score)) result.ledger.update(sp);

            const std::vector<ScoredPrompt> selected = select(scored, config_.s);

            IterationRecord record;
            record.iteration = it;
            record.population = scored;
            record.injected_random_count = (it + 1 < config_.iterations) ? r : 0;
            for (const auto& sp : selected) record.selected_ids.push_back(sp.candidate.id);
            result.history.push_back(record);
            if (on_iteration_) on_iteration_(result.history.back());

            if (it + 1 < config_.iterations) {
                population = next_population(selected, it + 1);
                scored = evaluate_population(population);
            }
        }
    } catch (const std::exception& e) {
        result.manifest.finished_at = timestamp_utc();
        throw MiningAbort(e.what(), std::move(result));
    }

    result.manifest.finished_at = timestamp_utc();
    return result;
}

}  // namespace minegap
