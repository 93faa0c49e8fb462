#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqlev/catalog.hpp"
#include "sqlev/dataset.hpp"
#include "sqlev/finding.hpp"

namespace sqlev {

class LlmGateway;

// A subset of a catalog plus its deterministic DDL-like rendering. Every
// included ref exists in the source catalog; hallucinated names are
// filtered before construction.
struct SchemaView {
    std::string source_db;
    // (table, column) pairs; a table-level entry (no column) includes every
    // column of that table. Catalog declaration order.
    std::vector<std::pair<std::string, std::optional<std::string>>> included;
    std::string rendered;

    bool includes_table(const std::string& table) const;
};

// All tables, all columns — the default for the unconstrained path.
SchemaView full_view(const SchemaCatalog& catalog);

// One CREATE TABLE-style block per table, each column line suffixed with
// `-- <column_description> | <value_description excerpt>`.
std::string render_view(const SchemaCatalog& catalog,
                        const std::vector<std::pair<std::string, std::optional<std::string>>>&
                            included);

// Question-conditioned schema reduction for token-constrained base models.
// The model proposes relevant tables (or table.column refs); anything not in
// the catalog is dropped. Empty or entirely invalid selections, and gateway
// failures, fall back to the full view truncated table-by-table to fit the
// budget. The returned view always satisfies
// estimate_tokens(rendered) <= budget_tokens.
SchemaView summarize(const SchemaCatalog& catalog, const std::string& question,
                     std::size_t budget_tokens, LlmGateway& gateway,
                     const std::string& model_id, Findings& findings,
                     const std::string& prompt_dir = "");

// Schema summarization for few-shot examples, one view per example; an
// example whose catalog cannot be resolved yields nullopt plus a finding and
// is dropped from the few-shot set by the caller.
using CatalogLookup = std::function<const SchemaCatalog*(const std::string& db_id)>;
std::vector<std::optional<SchemaView>> summarize_examples(
    const std::vector<QuestionRecord>& examples, const CatalogLookup& catalogs,
    std::size_t budget_tokens, LlmGateway& gateway, const std::string& model_id,
    Findings& findings, const std::string& prompt_dir = "");

}  // namespace sqlev
