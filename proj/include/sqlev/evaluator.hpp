#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sqlev/catalog.hpp"
#include "sqlev/dataset.hpp"
#include "sqlev/finding.hpp"

namespace sqlev {

// Execution outcome of one SELECT. The row signature reduces the result to
// a set of row tuples: order-insensitive, duplicate-collapsed, column order
// preserved, NULLs equal to NULLs.
struct ExecOutcome {
    enum class Status { ok, error, timeout };
    Status status = Status::error;
    std::set<std::vector<std::string>> row_signature;  // defined only when ok
    std::vector<double> elapsed_samples;               // ms, one per timed run
    std::string error_message;
};

// Validates the statement as in the prober, executes it read-only with the
// given timeout, and optionally times 1 warmup + timed_runs repetitions.
ExecOutcome execute_sql(const std::string& sql, const SchemaCatalog& db, int timeout_ms,
                        int timed_runs = 0);

// True iff pred executed and both signatures are equal. Gold must have
// status ok (gold failures are dataset errors, reported separately).
bool execution_match(const ExecOutcome& pred, const ExecOutcome& gold);

// Mean with min and max dropped when 4 or more samples are present.
double trimmed_mean(const std::vector<double>& samples);

struct VesEntry {
    bool match = false;
    double t_gold = 1.0;
    double t_pred = 1.0;
};

// VES = (100/N) * sum over questions of [match] * sqrt(t_gold/t_pred).
double ves(const std::vector<VesEntry>& entries);

enum class AuditCategory {
    missing_evidence,
    case_sensitivity,
    unknown_schema_ref,
    invalid_value_mapping,
    unnecessary_information,
};
const char* audit_category_name(AuditCategory c);

struct AuditFinding {
    std::string question_id;  // stamped by the caller
    AuditCategory category = AuditCategory::missing_evidence;
    Finding::Severity severity = Finding::Severity::warning;
    std::string detail;
    size_t span_begin = 0;  // character range of the offending clause
    size_t span_end = 0;
};

// Rule-based audit of one evidence string against a profiled catalog:
//   - absent/empty evidence            -> missing_evidence
//   - col = 'literal' matching a stored value only case-insensitively
//                                      -> case_sensitivity
//   - referenced names absent from the catalog
//                                      -> unknown_schema_ref
//   - col = 'literal' matching nothing (profile uncapped)
//                                      -> invalid_value_mapping
//   - mapping clause sharing no content token with the question
//                                      -> unnecessary_information (info)
std::vector<AuditFinding> audit_evidence(const std::optional<std::string>& evidence,
                                         const std::string& question,
                                         const SchemaCatalog& catalog);

enum class EvidenceSource { none, gold, file };

struct BenchmarkOptions {
    EvidenceSource evidence_source = EvidenceSource::none;
    // question_id -> evidence text, required when evidence_source == file.
    std::map<std::string, std::string> evidence_by_id;
    bool timing = false;
    int timeout_ms = 30000;
    int timed_runs = 5;
    int parallelism = 1;  // forced to 1 while timing
};

struct PerQuestionOutcome {
    std::string question_id;
    bool match = false;
    bool gold_failed = false;  // excluded from N
    std::optional<double> time_ratio;  // t_gold / t_pred
    std::vector<AuditFinding> audit;
    Findings findings;
};

struct EvalReport {
    size_t n_questions = 0;  // evaluable questions (gold executed ok)
    size_t n_matches = 0;
    double ex_percent = 0.0;
    std::optional<double> ves_percent;
    std::optional<double> missing_evidence_rate;  // percent, when auditing
    std::map<std::string, size_t> audit_histogram;
    size_t gold_failures = 0;
    std::vector<PerQuestionOutcome> per_question;
};

using BenchmarkCatalogLookup =
    std::function<const SchemaCatalog*(const std::string& db_id)>;

// Executes gold and predicted SQL for every question, aggregates EX (and
// VES when timing), audits evidence per the selected source, and reports
// per-question outcomes. Missing predictions count as non-matches with a
// finding; gold failures are excluded from N and reported.
EvalReport run_benchmark(const std::vector<QuestionRecord>& questions,
                         const std::map<std::string, std::string>& predictions,
                         const BenchmarkCatalogLookup& catalogs,
                         const BenchmarkOptions& options, Findings& findings);

// Plain-text table with one row per condition (EX% / VES% columns).
std::string render_report_table(
    const std::vector<std::pair<std::string, const EvalReport*>>& conditions);

}  // namespace sqlev
