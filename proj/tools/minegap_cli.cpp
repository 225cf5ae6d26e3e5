// Command-line front end: mine, score, validate, crosseval, sweep,
// categorize, sim. Diagnostics go to stderr, data to files or stdout.
// Exit codes: 0 success, 1 configuration error, 2 backend/runtime error.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "minegap/engine.hpp"
#include "minegap/eval.hpp"
#include "minegap/json_io.hpp"
#include "minegap/simworld.hpp"

using namespace minegap;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string output_dir;
    std::size_t parallelism = 0;  // 0 = take from config
    bool verbose = false;
};

RunConfig load_config(const GlobalOpts& opts) {
    if (opts.config_path.empty()) throw ConfigError("--config is required");
    RunConfig cfg = load_run_config(opts.config_path);
    if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
    if (opts.parallelism > 0) cfg.mining.parallelism = opts.parallelism;
    if (opts.verbose) cfg.verbose = true;
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// Explainability payload: resolve the breakdown's index lists into the
// concrete variation texts and image references.
json explainability(const ScoredPrompt& sp) {
    json j = json::object();
    if (!sp.breakdown) return j;
    json missed = json::array(), least = json::array();
    for (std::size_t i : sp.breakdown->missed_variation_indices)
        if (i < sp.variation_texts.size()) missed.push_back(sp.variation_texts[i]);
    for (std::size_t i : sp.breakdown->least_aligned_image_indices)
        if (i < sp.image_refs.size()) least.push_back(sp.image_refs[i]);
    j["missed_variation_texts"] = missed;
    j["least_aligned_image_refs"] = least;
    return j;
}

json topk_report(const TopKLedger& ledger) {
    json entries = json::array();
    for (const auto& sp : ledger.entries()) {
        json e = to_json(sp);
        e["explainability"] = explainability(sp);
        entries.push_back(std::move(e));
    }
    return json{{"top_k", entries}};
}

void write_run_outputs(const RunConfig& cfg, const MiningResult& result) {
    const fs::path dir(cfg.output_dir);
    write_text(dir / "manifest.json",
               json{{"mining", to_json(cfg.mining)}, {"run", to_json(result.manifest)}}.dump(2) +
                   "\n");
    std::ostringstream jsonl;
    for (const auto& rec : result.history) jsonl << to_json(rec).dump() << "\n";
    write_text(dir / "iterations.jsonl", jsonl.str());
    write_text(dir / "topk.json", topk_report(result.ledger).dump(2) + "\n");
}

int cmd_mine(const GlobalOpts& opts, std::uint64_t run_seed) {
    const RunConfig cfg = load_config(opts);
    MiningEngine engine(cfg.mining, build_backend_suite(cfg, run_seed), bias_objective());
    try {
        const MiningResult result = engine.run(run_seed);
        write_run_outputs(cfg, result);
        std::cerr << "mined " << result.ledger.entries().size() << " top prompts into "
                  << cfg.output_dir << "\n";
        return 0;
    } catch (const MiningAbort& abort) {
        write_run_outputs(cfg, abort.partial());  // preserve partial logs
        std::cerr << "mining aborted: " << abort.what() << " (partial logs in "
                  << cfg.output_dir << ")\n";
        return 2;
    }
}

int cmd_score(const GlobalOpts& opts, const std::string& prompts_path, std::uint64_t run_seed) {
    const RunConfig cfg = load_config(opts);
    std::ifstream in(prompts_path);
    if (!in) throw ConfigError("cannot read prompts file: " + prompts_path);
    std::vector<std::string> prompts;
    std::string line;
    while (std::getline(in, line)) {
        if (!normalize_prompt_key(line).empty()) prompts.push_back(line);
    }
    if (prompts.empty()) throw ConfigError("prompts file is empty: " + prompts_path);

    const BackendSuite suite = build_backend_suite(cfg, run_seed);
    std::vector<ScoredPrompt> scored;
    std::uint64_t id = 1;
    for (const auto& text : prompts) {
        PromptCandidate c;
        c.id = id++;
        c.text = text;
        scored.push_back(evaluate_bias(c, suite, cfg.mining));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredPrompt& a, const ScoredPrompt& b) { return a.score < b.score; });
    json out = json::array();
    for (const auto& sp : scored) {
        json e = to_json(sp);
        e["explainability"] = explainability(sp);
        out.push_back(std::move(e));
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

// Ground-truth CSV: optional "# rank_direction=..." metadata line, then a
// "label,reference_rank" header.
RankingPair read_ranking_csv(const std::string& path, const std::vector<double>& scores) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read ranking file: " + path);
    RankingPair pair;
    bool most_biased_first = true;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("least_biased_first") != std::string::npos) most_biased_first = false;
            else if (line.find("most_biased_first") == std::string::npos &&
                     line.find("rank_direction") != std::string::npos)
                throw ConfigError("unknown rank_direction in " + path);
            continue;
        }
        if (!header_seen) {
            if (line.rfind("label,", 0) != 0)
                throw ConfigError("ranking file must start with a label,reference_rank header");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("malformed ranking row: " + line);
        pair.labels.push_back(line.substr(0, comma));
        pair.reference_ranks.push_back(std::stod(line.substr(comma + 1)));
    }
    if (!most_biased_first)
        for (auto& r : pair.reference_ranks) r = -r;
    pair.candidate_scores = scores;
    return pair;
}

int cmd_validate(const std::string& ranking_path, const std::string& scores_path) {
    std::ifstream in(scores_path);
    if (!in) throw ConfigError("cannot read scores file: " + scores_path);
    std::vector<double> scores;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) scores.push_back(std::stod(line));
    const RankingPair pair = read_ranking_csv(ranking_path, scores);
    std::cout << validate_ranking(pair) << "\n";
    return 0;
}

int cmd_crosseval(const GlobalOpts& opts, const std::string& spec_path) {
    std::ifstream in(spec_path);
    if (!in) throw ConfigError("cannot read cross-eval spec: " + spec_path);
    json spec;
    try {
        in >> spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cross-eval spec is not valid JSON: ") + e.what());
    }

    MiningConfig mining = mining_config_from_json(spec.value("mining", json::object()));
    std::map<std::string, BackendSuite> backends;
    std::map<std::string, std::vector<std::string>> prompt_sets;
    try {
        for (const auto& [model, block] : spec.at("models").items()) {
            RunConfig rc;
            rc.mining = mining;
            rc.backends = block;
            backends[model] = build_backend_suite(rc, 0);
        }
        for (const auto& [model, prompts] : spec.at("prompt_sets").items())
            prompt_sets[model] = prompts.get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid cross-eval spec: ") + e.what());
    }

    const CrossEvalMatrix matrix = cross_eval(prompt_sets, backends, mining);

    const fs::path dir(opts.output_dir.empty() ? "out" : opts.output_dir);
    std::ostringstream summary, per_prompt;
    summary << "evaluator,source,min,q1,median,q3,mean,count\n";
    per_prompt << "evaluator,source,prompt,score\n";
    for (const auto& [evaluator, row] : matrix) {
        for (const auto& [source, cell] : row) {
            summary << evaluator << ',' << source << ',' << cell.min << ',' << cell.q1 << ','
                    << cell.median << ',' << cell.q3 << ',' << cell.mean << ',' << cell.count
                    << "\n";
            for (std::size_t i = 0; i < cell.scores.size(); ++i)
                per_prompt << evaluator << ',' << source << ",\""
                           << prompt_sets.at(source)[i] << "\"," << cell.scores[i] << "\n";
        }
    }
    write_text(dir / "crosseval_matrix.csv", summary.str());
    write_text(dir / "crosseval_scores.csv", per_prompt.str());
    std::cout << summary.str();
    return 0;
}

int cmd_sweep(const GlobalOpts& opts, const std::string& prompts_path,
              const std::vector<double>& values, std::uint64_t run_seed) {
    const RunConfig cfg = load_config(opts);
    std::ifstream in(prompts_path);
    if (!in) throw ConfigError("cannot read prompts file: " + prompts_path);
    std::vector<std::string> prompts;
    std::string line;
    while (std::getline(in, line))
        if (!normalize_prompt_key(line).empty()) prompts.push_back(line);
    if (prompts.empty()) throw ConfigError("prompts file is empty");

    const BackendSuite suite = build_backend_suite(cfg, run_seed);
    const auto sweep = guidance_sweep(prompts, suite, values, cfg.mining);

    std::ostringstream csv;
    csv << "guidance,prompt,score\n";
    for (const auto& [value, scores] : sweep)
        for (std::size_t i = 0; i < scores.size(); ++i)
            csv << value << ",\"" << prompts[i] << "\"," << scores[i] << "\n";
    write_text(fs::path(cfg.output_dir) / "sweep.csv", csv.str());
    std::cout << csv.str();
    return 0;
}

int cmd_categorize(const std::string& categories_path, const std::string& report_path) {
    std::ifstream cats_in(categories_path);
    if (!cats_in) throw ConfigError("cannot read category file: " + categories_path);
    json cats_json;
    try {
        cats_in >> cats_json;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("category file is not valid JSON: ") + e.what());
    }
    const CategorySet categories = category_set_from_json(cats_json);

    std::ifstream rep_in(report_path);
    if (!rep_in) throw ConfigError("cannot read report file: " + report_path);
    json report;
    try {
        rep_in >> report;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report file is not valid JSON: ") + e.what());
    }

    json out = json::array();
    for (const auto& entry : report.value("top_k", json::array())) {
        const std::string prompt = entry.at("candidate").at("text").get<std::string>();
        std::vector<std::string> concepts;
        if (entry.contains("explainability"))
            concepts = entry.at("explainability")
                           .value("missed_variation_texts", std::vector<std::string>{});
        const auto assigned = assign_categories(prompt, concepts, categories);
        out.push_back(json{{"prompt", prompt},
                           {"categories", std::vector<std::string>(assigned.begin(),
                                                                   assigned.end())}});
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

// Canned simworld scenarios for quick demonstrations.
int cmd_sim(const std::string& scenario, std::uint64_t seed) {
    if (scenario == "planted") {
        SimVocabulary vocab = SimVocabulary::standard(50, 32, 0);
        vocab.diversity_overrides = {{"tok7", 0.0}, {"tok23", 0.0}};
        MiningConfig cfg;
        MiningEngine engine(cfg, sim_backend_suite(vocab, seed), bias_objective());
        const MiningResult res = engine.run(seed);
        json entries = json::array();
        bool recovered = false;
        for (const auto& sp : res.ledger.entries()) {
            const bool hit = sp.candidate.text.find("tok7") != std::string::npos ||
                             sp.candidate.text.find("tok23") != std::string::npos;
            recovered = recovered || hit;
            entries.push_back(json{{"prompt", sp.candidate.text},
                                   {"score", sp.score},
                                   {"contains_planted_token", hit}});
        }
        std::cout << json{{"scenario", "planted"},
                          {"seed", seed},
                          {"planted_tokens", {"tok7", "tok23"}},
                          {"recovered", recovered},
                          {"top_k", entries}}
                         .dump(2)
                  << "\n";
        return 0;
    }
    if (scenario == "sweep") {
        MiningConfig cfg;
        json points = json::array();
        for (double delta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            SimVocabulary vocab = SimVocabulary::standard(50, 32, 0);
            vocab.diversity_overrides = {{"tok0", delta}, {"tok1", delta}, {"tok2", delta}};
            PromptCandidate c;
            c.id = 0;
            c.text = "tok0 tok1 tok2";
            points.push_back(json{
                {"diversity", delta},
                {"bias", evaluate_bias(c, sim_backend_suite(vocab, seed), cfg).score}});
        }
        std::cout << json{{"scenario", "sweep"}, {"prompt", "tok0 tok1 tok2"},
                          {"points", points}}
                         .dump(2)
                  << "\n";
        return 0;
    }
    if (scenario == "color") {
        SimVocabulary vocab = SimVocabulary::standard(30, 32, 0);
        vocab.prompt_length = 1;
        MiningConfig cfg;
        cfg.llm_retries = 10;
        auto objective = color_task_objective("tok0", vocab);
        MiningEngine engine(cfg, sim_backend_suite(vocab, seed), objective);
        const MiningResult res = engine.run(seed);
        json losses = json::array();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& rec : res.history) {
            for (const auto& sp : rec.population) best = std::min(best, sp.score);
            losses.push_back(best);
        }
        std::cout << json{{"scenario", "color"},
                          {"target_token", "tok0"},
                          {"best_loss_by_iteration", losses},
                          {"best_prompt", res.ledger.entries().front().candidate.text}}
                         .dump(2)
                  << "\n";
        return 0;
    }
    throw ConfigError("unknown sim scenario: " + scenario +
                      " (expected planted, sweep, or color)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mine text-to-image prompts that trigger biased generations"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "run configuration file (JSON)");
    app.add_option("--output-dir", opts.output_dir, "output directory override");
    app.add_option("--parallelism", opts.parallelism, "evaluation parallelism override");
    app.add_flag("--verbose", opts.verbose, "include bulky payloads in reports");

    std::uint64_t run_seed = 0;
    std::string prompts_path, ranking_path, scores_path, spec_path;
    std::string categories_path, report_path, scenario = "planted";
    std::vector<double> guidance_values;

    auto* mine = app.add_subcommand("mine", "run the full mining loop");
    mine->add_option("--run-seed", run_seed, "seed for this mining run");

    auto* score = app.add_subcommand("score", "score prompts without mining");
    score->add_option("prompts", prompts_path, "file with one prompt per line")->required();
    score->add_option("--run-seed", run_seed, "backend seed");

    auto* validate = app.add_subcommand("validate", "rank-correlate scores vs ground truth");
    validate->add_option("ranking", ranking_path, "ground-truth CSV")->required();
    validate->add_option("scores", scores_path, "candidate scores, one per line")->required();

    auto* crosseval = app.add_subcommand("crosseval", "score prompt sets across models");
    crosseval->add_option("spec", spec_path, "cross-eval spec (JSON)")->required();

    auto* sweep = app.add_subcommand("sweep", "bias scores across guidance values");
    sweep->add_option("prompts", prompts_path, "file with one prompt per line")->required();
    sweep->add_option("--values", guidance_values, "guidance values")->required();
    sweep->add_option("--run-seed", run_seed, "backend seed");

    auto* categorize = app.add_subcommand("categorize", "assign semantic categories");
    categorize->add_option("categories", categories_path, "category JSON file")->required();
    categorize->add_option("report", report_path, "topk.json report from mine")->required();

    auto* sim = app.add_subcommand("sim", "canned simworld scenarios");
    sim->add_option("scenario", scenario, "planted | sweep | color");
    sim->add_option("--run-seed", run_seed, "scenario seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mine->parsed()) return cmd_mine(opts, run_seed);
        if (score->parsed()) return cmd_score(opts, prompts_path, run_seed);
        if (validate->parsed()) return cmd_validate(ranking_path, scores_path);
        if (crosseval->parsed()) return cmd_crosseval(opts, spec_path);
        if (sweep->parsed()) return cmd_sweep(opts, prompts_path, guidance_values, run_seed);
        if (categorize->parsed()) return cmd_categorize(categories_path, report_path);
        if (sim->parsed()) return cmd_sim(scenario, run_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
