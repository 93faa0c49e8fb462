#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sqlev/catalog.hpp"
#include "sqlev/finding.hpp"
#include "sqlev/prober.hpp"
#include "sqlev/retriever.hpp"
#include "sqlev/summarizer.hpp"

namespace sqlev {

class LlmGateway;

enum class EvidenceMode { full_schema, summarized, revised };
const char* evidence_mode_name(EvidenceMode m);

// Fixed section order: instruction, examples, probe results, schema,
// question. Rendering is deterministic so replayed runs are byte-identical.
struct EvidencePrompt {
    std::string instruction;
    std::string examples;
    std::string probe_results;
    std::string schema;
    std::string question;

    std::string render() const;
    std::size_t estimated_tokens() const;
};

struct EvidenceClause {
    std::string text;
    std::vector<std::string> unknown_refs;  // backticked names absent from the catalog
    std::optional<std::string> source;      // probe/description provenance when known
};

struct EvidenceBundle {
    std::vector<EvidenceClause> clauses;
    std::string raw;
    EvidenceMode mode = EvidenceMode::full_schema;
};

// Clause splitting on ";" with whitespace trimming; empty clauses dropped.
std::vector<std::string> split_clauses(const std::string& raw);

// join(split(raw)) with "; " — the canonical clause-joined form.
std::string normalize_evidence(const std::string& raw);

struct PromptBudget {
    std::size_t max_tokens = 0;  // 0 = unlimited
};

struct PromptInputs {
    std::string question;
    const SchemaView* schema_view = nullptr;
    std::vector<ProbeResult> probes;
    const FewShotSet* few_shot = nullptr;
    // Optional per-example schema views (summarized mode); index-aligned
    // with few_shot->ordered_records().
    std::vector<std::optional<SchemaView>> example_views;
    std::string instruction;
};

// Deterministic assembly. Oversize prompts shed probe records first (last
// record first), then few-shot examples (last companion first, anchor last);
// schema and question are never truncated. Still oversize -> PromptOversize.
EvidencePrompt assemble_prompt(const PromptInputs& inputs, const PromptBudget& budget,
                               Findings& findings);

// Invokes the gateway and parses the reply into clauses. Backtick-quoted
// identifiers are checked against the catalog; clauses with unknown names
// are kept but flagged in provenance.
EvidenceBundle generate_evidence(const EvidencePrompt& prompt, LlmGateway& gateway,
                                 const std::string& model_id, const SchemaCatalog& catalog,
                                 EvidenceMode mode, const std::string& question_id,
                                 Findings& findings);

// Matches the join clauses the revised format strips: clauses beginning
// with "join on", or containing " join " with an equality between two
// qualified column refs and no "refers to".
bool is_join_clause(const std::string& clause);

// Deterministic join-info removal; idempotent; no gateway call.
EvidenceBundle revise_evidence(EvidenceBundle bundle);

}  // namespace sqlev
