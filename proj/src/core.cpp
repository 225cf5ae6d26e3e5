#include "minegap/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace minegap {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Initial: return "initial";
        case Provenance::Random: return "random";
        case Provenance::Mutation: return "mutation";
    }
    throw std::logic_error("unknown provenance");
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "initial") return Provenance::Initial;
    if (s == "random") return Provenance::Random;
    if (s == "mutation") return Provenance::Mutation;
    throw std::invalid_argument("unknown provenance: " + s);
}

void PromptCandidate::validate(std::size_t max_words) const {
    if (normalize_prompt_key(text).empty())
        throw std::invalid_argument("candidate text is empty after trimming");
    if (max_words > 0 && count_words(text) > max_words)
        throw std::invalid_argument("candidate exceeds word limit: " + text);
    const bool has_parent = parent_id.has_value();
    if (has_parent != (provenance == Provenance::Mutation))
        throw std::invalid_argument("parent_id must be present iff provenance is mutation");
}

MiningConfig::MiningConfig() {
    seed_list.resize(N);
    for (std::size_t i = 0; i < N; ++i) seed_list[i] = i;
}

void MiningConfig::validate() const {
    if (b < 1) throw std::invalid_argument("b must be >= 1");
    if (s < 1 || s > b) throw std::invalid_argument("require 1 <= s <= b");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (s * m > b) throw std::invalid_argument("require s*m <= b");
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (alpha < 0.0 || alpha > 100.0) throw std::invalid_argument("alpha must be in [0, 100]");
    if (seed_list.size() != N) throw std::invalid_argument("|seed_list| must equal N");
    if (!(mean_guard > 0.0)) throw std::invalid_argument("mean_guard must be > 0");
    if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
}

std::size_t derive_random_count(std::size_t b, std::size_t s, std::size_t m) {
    if (s < 1 || m < 1) throw std::invalid_argument("s and m must be >= 1");
    if (s * m > b) throw std::invalid_argument("s*m exceeds population size b");
    return b - s * m;
}

std::string normalize_prompt_key(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::size_t count_words(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    std::size_t n = 0;
    while (in >> word) ++n;
    return n;
}

TopKLedger::TopKLedger(std::size_t capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("ledger capacity must be >= 1");
}

double TopKLedger::best_score() const {
    if (entries_.empty()) return std::numeric_limits<double>::infinity();
    return entries_.front().score;
}

bool TopKLedger::update(const ScoredPrompt& item) {
    if (!std::isfinite(item.score))
        throw std::invalid_argument("ledger rejects non-finite scores");
    const std::string key = normalize_prompt_key(item.candidate.text);

    auto existing = std::find_if(entries_.begin(), entries_.end(), [&](const ScoredPrompt& e) {
        return normalize_prompt_key(e.candidate.text) == key;
    });
    if (existing != entries_.end()) {
        if (item.score >= existing->score) return false;
        entries_.erase(existing);
    } else {
        if (entries_.size() >= capacity_ && item.score >= entries_.back().score) return false;
    }

    // Insert after any equal score so earlier insertions win ties.
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), item.score,
                                [](double sc, const ScoredPrompt& e) { return sc < e.score; });
    entries_.insert(pos, item);
    if (entries_.size() > capacity_) entries_.pop_back();
    return true;
}

}  // namespace minegap
