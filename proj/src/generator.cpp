#include "sqlev/generator.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "sqlev/errors.hpp"
#include "sqlev/gateway.hpp"
#include "sqlev/text.hpp"

namespace sqlev {

const char* evidence_mode_name(EvidenceMode m) {
    switch (m) {
        case EvidenceMode::full_schema: return "full_schema";
        case EvidenceMode::summarized: return "summarized";
        case EvidenceMode::revised: return "revised";
    }
    return "full_schema";
}

std::string EvidencePrompt::render() const {
    std::ostringstream out;
    out << instruction << "\n";
    out << "### Examples\n" << examples << "\n";
    out << "### Sample query results\n" << probe_results << "\n";
    out << "### Schema\n" << schema << "\n";
    out << "### Question\n" << question << "\n";
    return out.str();
}

std::size_t EvidencePrompt::estimated_tokens() const { return estimate_tokens(render()); }

std::vector<std::string> split_clauses(const std::string& raw) {
    std::vector<std::string> clauses;
    std::string cur;
    for (char c : raw) {
        if (c == ';') {
            std::string clause = trim(cur);
            if (!clause.empty()) clauses.push_back(std::move(clause));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    std::string clause = trim(cur);
    if (!clause.empty()) clauses.push_back(std::move(clause));
    return clauses;
}

std::string normalize_evidence(const std::string& raw) {
    return join(split_clauses(raw), "; ");
}

namespace {

std::string render_examples(const FewShotSet& few_shot,
                            const std::vector<std::optional<SchemaView>>& example_views,
                            size_t example_count) {
    std::ostringstream out;
    std::vector<QuestionRecord> records = few_shot.ordered_records();
    for (size_t i = 0; i < std::min(example_count, records.size()); ++i) {
        out << "Example " << (i + 1) << ":\n";
        if (i < example_views.size() && example_views[i]) {
            out << "Schema:\n" << example_views[i]->rendered;
        }
        out << "Question: " << records[i].question << "\n";
        out << "Evidence: " << records[i].gold_evidence.value_or("") << "\n\n";
    }
    return out.str();
}

}  // namespace

EvidencePrompt assemble_prompt(const PromptInputs& inputs, const PromptBudget& budget,
                               Findings& findings) {
    EvidencePrompt prompt;
    prompt.instruction = inputs.instruction;
    prompt.schema = inputs.schema_view ? inputs.schema_view->rendered : "";
    prompt.question = inputs.question;

    size_t probe_count = inputs.probes.size();
    size_t example_count =
        inputs.few_shot ? inputs.few_shot->ordered_records().size() : 0;

    auto rebuild = [&] {
        prompt.probe_results = render_transcript(
            {inputs.probes.begin(), inputs.probes.begin() + probe_count});
        prompt.examples =
            inputs.few_shot
                ? render_examples(*inputs.few_shot, inputs.example_views, example_count)
                : "";
    };
    rebuild();
    if (budget.max_tokens == 0 || prompt.estimated_tokens() <= budget.max_tokens) {
        return prompt;
    }

    // Oversize: shed probe records from the end first.
    while (probe_count > 0 && prompt.estimated_tokens() > budget.max_tokens) {
        --probe_count;
        rebuild();
    }
    // Then examples, last companion first; the anchor goes last.
    size_t dropped_examples = 0;
    while (example_count > 0 && prompt.estimated_tokens() > budget.max_tokens) {
        --example_count;
        ++dropped_examples;
        rebuild();
    }
    if (prompt.estimated_tokens() > budget.max_tokens) {
        throw PromptOversize("prompt exceeds " + std::to_string(budget.max_tokens) +
                             " tokens after dropping all probe results and examples");
    }
    add_finding(findings, Finding::Severity::info, "prompt_truncated",
                "dropped " + std::to_string(inputs.probes.size() - probe_count) +
                    " probe record(s) and " + std::to_string(dropped_examples) +
                    " example(s) to fit the prompt budget");
    return prompt;
}

namespace {

// `table`.`column` and bare `name` backtick references.
void collect_unknown_refs(const std::string& clause, const SchemaCatalog& catalog,
                          std::vector<std::string>& unknown) {
    static const std::regex qualified(R"(`([^`]+)`\s*\.\s*`([^`]+)`)");
    static const std::regex bare(R"(`([^`]+)`)");

    std::set<std::string> seen;
    auto note = [&](const std::string& name) {
        if (seen.insert(to_lower(name)).second) unknown.push_back(name);
    };

    std::string remainder = clause;
    for (std::sregex_iterator it(clause.begin(), clause.end(), qualified), end;
         it != end; ++it) {
        const std::string table = (*it)[1];
        const std::string column = (*it)[2];
        if (!catalog.find_column(table, column)) note(table + "." + column);
    }
    // Bare backticked names that are not part of a qualified pair.
    std::string without_qualified = std::regex_replace(clause, qualified, " ");
    for (std::sregex_iterator it(without_qualified.begin(), without_qualified.end(), bare),
         end;
         it != end; ++it) {
        const std::string name = (*it)[1];
        if (catalog.has_table(name)) continue;
        if (!catalog.columns_named(name).empty()) continue;
        note(name);
    }
}

}  // namespace

EvidenceBundle generate_evidence(const EvidencePrompt& prompt, LlmGateway& gateway,
                                 const std::string& model_id, const SchemaCatalog& catalog,
                                 EvidenceMode mode, const std::string& question_id,
                                 Findings& findings) {
    ChatRequest request;
    request.model_id = model_id;
    request.messages = {{"user", prompt.render()}};

    std::string reply;
    try {
        reply = gateway.chat(request, "generate");
    } catch (const GatewayError& e) {
        throw GatewayError("generate", question_id + ": " + e.what());
    }

    EvidenceBundle bundle;
    bundle.mode = mode;
    bundle.raw = trim(reply);
    for (auto& text : split_clauses(bundle.raw)) {
        EvidenceClause clause;
        clause.text = std::move(text);
        collect_unknown_refs(clause.text, catalog, clause.unknown_refs);
        bundle.clauses.push_back(std::move(clause));
    }
    if (bundle.clauses.empty()) {
        add_finding(findings, Finding::Severity::warning, "evidence_empty",
                    question_id + ": model returned no evidence clause");
    }
    return bundle;
}

bool is_join_clause(const std::string& clause) {
    std::string lowered = to_lower(trim(clause));
    if (istarts_with(lowered, "join on")) return true;
    if (lowered.find(" join ") == std::string::npos) return false;
    if (lowered.find("refers to") != std::string::npos) return false;
    // Equality between two qualified column refs, backticked or dotted.
    static const std::regex qualified_eq(
        R"((`[^`]+`\s*\.\s*`[^`]+`|[A-Za-z_][\w]*\.[A-Za-z_][\w]*)\s*=\s*)"
        R"((`[^`]+`\s*\.\s*`[^`]+`|[A-Za-z_][\w]*\.[A-Za-z_][\w]*))");
    return std::regex_search(clause, qualified_eq);
}

EvidenceBundle revise_evidence(EvidenceBundle bundle) {
    std::vector<EvidenceClause> kept;
    kept.reserve(bundle.clauses.size());
    for (auto& clause : bundle.clauses) {
        if (!is_join_clause(clause.text)) kept.push_back(std::move(clause));
    }
    bundle.clauses = std::move(kept);
    std::vector<std::string> texts;
    texts.reserve(bundle.clauses.size());
    for (const auto& clause : bundle.clauses) texts.push_back(clause.text);
    bundle.raw = join(texts, "; ");
    bundle.mode = EvidenceMode::revised;
    return bundle;
}

}  // namespace sqlev
