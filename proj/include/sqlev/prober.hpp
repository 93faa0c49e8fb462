#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlev/catalog.hpp"
#include "sqlev/finding.hpp"

namespace sqlev {

class LlmGateway;

enum class KeywordKind { column_ref, value_literal, ambiguous };
const char* keyword_kind_name(KeywordKind k);

struct KeywordCandidate {
    std::string surface;  // contiguous substring of the question (case-insensitive)
    KeywordKind kind = KeywordKind::ambiguous;
    std::vector<ColumnRef> matched_columns;  // ranked, all present in the catalog
};

enum class ProbeKind { distinct, like, edit_distance };
const char* probe_kind_name(ProbeKind k);

struct ProbeSpec {
    ProbeKind kind = ProbeKind::distinct;
    ColumnRef target;
    std::optional<std::string> literal;  // bound as a parameter, never spliced
    std::string sql;                     // a single SELECT statement
};

enum class ProbeStatus { ok, timeout, error };
const char* probe_status_name(ProbeStatus s);

struct ProbeResult {
    ProbeSpec spec;
    std::vector<std::string> rows;  // rendered literals, capped
    bool truncated = false;
    double elapsed_ms = 0.0;
    ProbeStatus status = ProbeStatus::ok;
    std::string error_message;
};

struct ProbeCaps {
    int probe_count = 16;
    int row_cap = 10;
    int edit_distance_k = 3;  // nearest profiled values kept per probe
};

// Levenshtein distance with unit insert/delete/substitute costs, computed
// over Unicode scalar values.
std::int64_t edit_distance(std::string_view a, std::string_view b);

// Rejects anything that is not one read-only SELECT statement: forbidden
// verbs (INSERT/UPDATE/ATTACH/PRAGMA/...) are matched as word tokens outside
// string literals, quoted identifiers and comments. WITH ... SELECT is
// accepted. Returns false and fills `why` instead of throwing.
bool validate_read_only(const std::string& sql, std::string* why = nullptr);

// Question keywords naming columns or stored values. Model-proposed keywords
// are validated as question substrings; with no usable gateway a
// deterministic fallback matches question n-grams (1..4 tokens) against
// normalized column names and profiled values. Output is sorted by first
// occurrence in the question.
std::vector<KeywordCandidate> extract_keywords(const std::string& question,
                                               const SchemaCatalog& catalog,
                                               LlmGateway* gateway,
                                               const std::string& model_id,
                                               Findings& findings,
                                               const std::string& prompt_dir = "");

// Pairs candidates with probe kinds: one distinct probe per referenced
// column; per value literal a parameterized case-insensitive LIKE probe and,
// on text columns, a client-side edit-distance probe over profiled values.
std::vector<ProbeSpec> build_probes(const std::vector<KeywordCandidate>& candidates,
                                    const SchemaCatalog& catalog, const ProbeCaps& caps,
                                    Findings& findings);

// Executes each spec on its own read-only connection with a per-probe
// timeout. SQL errors and timeouts are captured per probe and never abort
// the batch; results come back in spec order.
std::vector<ProbeResult> execute_probes(const std::vector<ProbeSpec>& specs,
                                        const SchemaCatalog& catalog, int timeout_ms,
                                        int row_cap, int parallelism = 1,
                                        int edit_distance_k = 3);

// Deterministic transcript block for the evidence prompt (no timings).
std::string render_transcript(const std::vector<ProbeResult>& results);

// Full transcript records (sql, parameters, status, rows, elapsed_ms) for
// the per-question transcript file.
nlohmann::ordered_json transcript_to_json(const std::vector<ProbeResult>& results);

}  // namespace sqlev
