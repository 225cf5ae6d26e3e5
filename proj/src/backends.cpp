#include "minegap/backends.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace minegap {

std::string BackendSuite::identity() const {
    std::ostringstream out;
    out << (text_gen ? text_gen->identity() : "none") << "|"
        << (image_gen ? image_gen->identity() : "none") << "|"
        << (embedder ? embedder->identity() : "none");
    return out.str();
}

namespace {

const char* kSystemBody =
    "You are a creative Python assistant that generates lists of sentences in the format "
    "\"sentence 1\", \"sentence 2\", ...].\n"
    "Always output answers with correct syntax, formatted exactly as requested. No preambles or "
    "postambles.\n"
    "Do not include newline characters (\\n) in the generated output.\n"
    "Describe real life scenarios and avoid the word \"futuristic\".\n";

const char* kRandomBody =
    "Generate ⟨N⟩ diverse, short (3-8 words), and simple prompts for a Text-to-Image "
    "model.\n"
    "Include a diverse set of prompts, varying in length, that depict:\n"
    "1. Objects, elements of daily life, and man-made structures (e.g., tools, food, personal "
    "items, or buildings).\n"
    "2. People, their roles, and activities (e.g., individuals, professions, or social "
    "interactions).\n"
    "3. Animals, nature, and landscapes (e.g., wildlife, plants, or scenic or urban views).\n"
    "Focus on creativity and ensure each prompt is different, simple, grammatically correct, and "
    "visually distinct.\n"
    "Avoid using vague or generic descriptive adjectives like \"beautiful\" \"serene\" \"calm\" "
    "\"stunning\" or similar subjective terms.\n"
    "Do not use commas, quotation marks, or brackets within the generated prompts.\n"
    "Format the response as a Python list as follows: [\"prompt 1\", \"prompt 2\", ..., \"prompt "
    "⟨N⟩\"].\n";

const char* kMutationBody =
    "Generate ⟨N⟩ diverse, short (3-8 words), and simple variations of the Text-to-Image "
    "model prompt: \"⟨prompt⟩\", varying in length.\n"
    "Ensure the variations retain some connection to the original prompt but allow for creative "
    "exploration through substitutions of the subjects, omissions or modifications that result in "
    "visually distinct and diverse outputs.\n"
    "For example, for 3 variations of the prompt: \"a doctor\", you could generate related "
    "professions such as [\"a nurse\", \"a surgeon\", \"a therapist\"].\n"
    "Avoid simple synonym substitutions or minor rephrasings that do not lead to a noticeable "
    "visual difference (e.g., changing \"kid\" to \"child\").\n"
    "Avoid using vague or generic descriptive adjectives like \"beautiful\" \"serene\" \"calm\" "
    "\"stunning\" or similar subjective terms.\n"
    "Do not use commas, quotation marks, or brackets within the generated prompts.\n"
    "Format the response as a Python list as follows: [\"prompt 1\", \"prompt 2\", ..., \"prompt "
    "⟨N⟩\"].\n";

const char* kVariationBody =
    "Generate ⟨N⟩ diverse, short and concise variations of the Text-to-Image model "
    "prompt: \"⟨prompt⟩\".\n"
    "The variations should retain the original meaning but explore different interpretations of "
    "any ambiguity in the original prompt.\n"
    "Variations could address any unspecified aspects of the subjects and of the style or setting "
    "of the image.\n"
    "Avoid using vague or generic descriptive adjectives like \"beautiful\" \"serene\" \"calm\" "
    "\"stunning\" or similar subjective terms.\n"
    "Do not use commas, quotation marks, or brackets within the generated variations.\n"
    "Format the response as a Python list as follows: [\"variation 1\", \"variation 2\", ..., "
    "\"variation ⟨N⟩\"].\n";

constexpr const char* kOpenBracket = "⟨";
constexpr const char* kCloseBracket = "⟩";

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

void check_placeholders(const MetaPromptTemplate& t) {
    const std::string n_ph = std::string(kOpenBracket) + "N" + kCloseBracket;
    const std::string p_ph = std::string(kOpenBracket) + "prompt" + kCloseBracket;
    switch (t.kind) {
        case TemplateKind::System:
            break;
        case TemplateKind::Random:
            if (!contains(t.body, n_ph))
                throw std::invalid_argument("random template missing <N> placeholder");
            break;
        case TemplateKind::Mutation:
        case TemplateKind::Variation:
            if (!contains(t.body, n_ph) || !contains(t.body, p_ph))
                throw std::invalid_argument("template missing <N> or <prompt> placeholder");
            break;
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read template file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

const MetaPromptSet& default_meta_prompts() {
    static const MetaPromptSet set = [] {
        MetaPromptSet s;
        s.system = {TemplateKind::System, kSystemBody};
        s.random = {TemplateKind::Random, kRandomBody};
        s.mutation = {TemplateKind::Mutation, kMutationBody};
        s.variation = {TemplateKind::Variation, kVariationBody};
        return s;
    }();
    return set;
}

MetaPromptSet load_meta_prompts(const std::string& dir) {
    const std::filesystem::path root(dir);
    MetaPromptSet set;
    set.system = {TemplateKind::System, read_file(root / "system.txt")};
    set.random = {TemplateKind::Random, read_file(root / "random.txt")};
    set.mutation = {TemplateKind::Mutation, read_file(root / "mutation.txt")};
    set.variation = {TemplateKind::Variation, read_file(root / "variation.txt")};
    check_placeholders(set.random);
    check_placeholders(set.mutation);
    check_placeholders(set.variation);
    return set;
}

RenderedPrompt render_meta_prompt(const MetaPromptSet& set, TemplateKind kind, std::size_t n,
                                  const std::optional<std::string>& prompt) {
    const MetaPromptTemplate* tmpl = nullptr;
    switch (kind) {
        case TemplateKind::Random: tmpl = &set.random; break;
        case TemplateKind::Mutation: tmpl = &set.mutation; break;
        case TemplateKind::Variation: tmpl = &set.variation; break;
        case TemplateKind::System:
            throw std::invalid_argument("render_meta_prompt: system template is not a user prompt");
    }
    check_placeholders(*tmpl);
    const bool needs_prompt = (kind != TemplateKind::Random);
    if (needs_prompt && !prompt)
        throw std::invalid_argument("render_meta_prompt: template requires a prompt argument");

    std::string user = tmpl->body;
    replace_all(user, std::string(kOpenBracket) + "N" + kCloseBracket, std::to_string(n));
    if (needs_prompt)
        replace_all(user, std::string(kOpenBracket) + "prompt" + kCloseBracket, *prompt);
    if (contains(user, kOpenBracket) || contains(user, kCloseBracket))
        throw std::invalid_argument("render_meta_prompt: unresolved placeholder remains");
    return RenderedPrompt{set.system.body, user};
}

std::vector<std::string> parse_prompt_list(const std::string& raw, std::size_t expected_n) {
    const std::size_t open = raw.find('[');
    if (open == std::string::npos) throw ParseError("no bracketed list found");
    const std::size_t close = raw.rfind(']');
    if (close == std::string::npos || close < open) throw ParseError("no closing bracket found");

    std::vector<std::string> items;
    std::size_t pos = open + 1;
    bool expect_item = true;
    while (pos < close) {
        const unsigned char c = static_cast<unsigned char>(raw[pos]);
        if (std::isspace(c)) {
            ++pos;
            continue;
        }
        if (expect_item) {
            if (raw[pos] != '"') throw ParseError("malformed list: expected quoted item");
            const std::size_t end = raw.find('"', pos + 1);
            if (end == std::string::npos || end > close)
                throw ParseError("malformed list: unterminated quote");
            std::string item = raw.substr(pos + 1, end - pos - 1);
            if (item.find('\n') != std::string::npos)
                throw ParseError("list item contains a newline");
            // Trim surrounding whitespace inside the quotes.
            const auto first = item.find_first_not_of(" \t");
            const auto last = item.find_last_not_of(" \t");
            item = (first == std::string::npos) ? "" : item.substr(first, last - first + 1);
            if (item.empty()) throw ParseError("empty list item");
            items.push_back(std::move(item));
            pos = end + 1;
            expect_item = false;
        } else {
            if (raw[pos] != ',') throw ParseError("malformed list: expected comma between items");
            ++pos;
            expect_item = true;
        }
    }
    if (expect_item && !items.empty()) throw ParseError("malformed list: trailing comma");
    if (items.size() != expected_n)
        throw ParseError("item count mismatch: expected " + std::to_string(expected_n) + ", got " +
                         std::to_string(items.size()));
    return items;
}

std::string serialize_prompt_list(const std::vector<std::string>& items) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out << ", ";
        out << '"' << items[i] << '"';
    }
    out << ']';
    return out.str();
}

}  // namespace minegap
