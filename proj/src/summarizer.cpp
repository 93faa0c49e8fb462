#include "sqlev/summarizer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sqlev/errors.hpp"
#include "sqlev/gateway.hpp"
#include "sqlev/prompts.hpp"
#include "sqlev/text.hpp"

namespace sqlev {

bool SchemaView::includes_table(const std::string& table) const {
    for (const auto& [t, c] : included) {
        if (iequals(t, table)) return true;
    }
    return false;
}

namespace {

std::string excerpt(const std::string& text, size_t limit = 120) {
    std::string out;
    out.reserve(std::min(text.size(), limit));
    for (char c : text) {
        out.push_back(c == '\n' || c == '\r' || c == '\t' ? ' ' : c);
        if (out.size() >= limit) break;
    }
    return out;
}

}  // namespace

std::string render_view(
    const SchemaCatalog& catalog,
    const std::vector<std::pair<std::string, std::optional<std::string>>>& included) {
    // Group refs per table; a table-level ref selects every column.
    std::map<std::string, std::set<std::string>> columns_by_table;  // lowered names
    std::set<std::string> whole_tables;
    for (const auto& [table, column] : included) {
        std::string t = to_lower(table);
        if (column) {
            columns_by_table[t].insert(to_lower(*column));
        } else {
            whole_tables.insert(t);
        }
    }

    std::ostringstream out;
    bool first = true;
    for (const auto& table : catalog.tables) {
        std::string t = to_lower(table.name);
        bool whole = whole_tables.count(t) > 0;
        auto cols_it = columns_by_table.find(t);
        if (!whole && cols_it == columns_by_table.end()) continue;

        if (!first) out << "\n";
        first = false;
        out << "CREATE TABLE " << table.name << " (\n";
        for (const auto& c : table.columns) {
            if (!whole && !cols_it->second.count(to_lower(c.original_column_name))) continue;
            out << "  " << c.original_column_name;
            if (!c.declared_type.empty()) out << " " << c.declared_type;
            if (c.is_primary_key) out << " PRIMARY KEY";
            out << ",  -- " << excerpt(c.column_description) << " | "
                << excerpt(c.value_description) << "\n";
        }
        for (const auto& c : table.columns) {
            if (!whole && !cols_it->second.count(to_lower(c.original_column_name))) continue;
            for (const auto& fk : c.foreign_refs) {
                out << "  FOREIGN KEY (" << c.original_column_name << ") REFERENCES "
                    << fk.table << "(" << fk.column << "),\n";
            }
        }
        out << ");\n";
    }
    return out.str();
}

SchemaView full_view(const SchemaCatalog& catalog) {
    SchemaView view;
    view.source_db = catalog.db_id;
    for (const auto& table : catalog.tables) {
        view.included.emplace_back(table.name, std::nullopt);
    }
    view.rendered = render_view(catalog, view.included);
    return view;
}

namespace {

// Tables whose names share a normalized token with the question come first,
// then declaration order.
std::vector<const TableEntry*> truncation_order(const SchemaCatalog& catalog,
                                                const std::string& question) {
    std::set<std::string> question_tokens;
    for (auto& tok : tokenize_split(question)) question_tokens.insert(tok);

    std::vector<const TableEntry*> related, rest;
    for (const auto& table : catalog.tables) {
        bool shares = false;
        for (auto& tok : tokenize_split(table.name)) {
            if (question_tokens.count(tok)) {
                shares = true;
                break;
            }
        }
        (shares ? related : rest).push_back(&table);
    }
    related.insert(related.end(), rest.begin(), rest.end());
    return related;
}

SchemaView truncate_to_budget(const SchemaCatalog& catalog,
                              const std::vector<const TableEntry*>& priority,
                              std::size_t budget_tokens) {
    SchemaView view;
    view.source_db = catalog.db_id;
    for (const TableEntry* table : priority) {
        auto candidate = view.included;
        candidate.emplace_back(table->name, std::nullopt);
        if (estimate_tokens(render_view(catalog, candidate)) <= budget_tokens) {
            view.included = std::move(candidate);
        }
    }
    if (view.included.empty() && !priority.empty()) {
        // Not even one whole table fits; keep a column prefix of the most
        // relevant table instead of returning an empty view.
        const TableEntry* table = priority.front();
        std::vector<std::pair<std::string, std::optional<std::string>>> cols;
        for (const auto& c : table->columns) {
            auto candidate = cols;
            candidate.emplace_back(table->name, c.original_column_name);
            if (estimate_tokens(render_view(catalog, candidate)) > budget_tokens) break;
            cols = std::move(candidate);
        }
        view.included = std::move(cols);
    }
    // Restore catalog declaration order.
    std::vector<std::pair<std::string, std::optional<std::string>>> ordered;
    for (const auto& table : catalog.tables) {
        for (const auto& [t, c] : view.included) {
            if (iequals(t, table.name)) ordered.emplace_back(t, c);
        }
    }
    view.included = std::move(ordered);
    view.rendered = render_view(catalog, view.included);
    return view;
}

std::string compact_schema_listing(const SchemaCatalog& catalog) {
    std::ostringstream out;
    for (const auto& table : catalog.tables) {
        out << table.name << "(";
        for (size_t i = 0; i < table.columns.size(); ++i) {
            if (i) out << ", ";
            out << table.columns[i].original_column_name;
        }
        out << ")\n";
    }
    return out.str();
}

// Extracts the first JSON array of strings from the model reply; entries are
// "table" or "table.column".
std::vector<std::string> parse_selection(const std::string& reply) {
    size_t begin = reply.find('[');
    size_t end = reply.rfind(']');
    if (begin == std::string::npos || end == std::string::npos || end < begin) return {};
    try {
        auto doc = nlohmann::json::parse(reply.substr(begin, end - begin + 1));
        if (!doc.is_array()) return {};
        std::vector<std::string> out;
        for (const auto& item : doc) {
            if (item.is_string()) out.push_back(item.get<std::string>());
        }
        return out;
    } catch (const nlohmann::json::exception&) {
        return {};
    }
}

}  // namespace

SchemaView summarize(const SchemaCatalog& catalog, const std::string& question,
                     std::size_t budget_tokens, LlmGateway& gateway,
                     const std::string& model_id, Findings& findings,
                     const std::string& prompt_dir) {
    if (budget_tokens < 512) {
        throw InvalidArgument("summarize: budget must be at least 512 tokens");
    }

    SchemaView full = full_view(catalog);
    if (estimate_tokens(full.rendered) <= budget_tokens) return full;

    auto fallback = [&](const std::string& code, const std::string& detail) {
        add_finding(findings, Finding::Severity::warning, code, detail);
        return truncate_to_budget(catalog, truncation_order(catalog, question), budget_tokens);
    };

    std::vector<std::string> selection;
    try {
        ChatRequest request;
        request.model_id = model_id;
        std::string instruction =
            prompts::load(prompt_dir, "schema_summarize.txt", prompts::kSchemaSummarize);
        request.messages = {{"user", instruction + "\nSchema:\n" +
                                         compact_schema_listing(catalog) + "\nQuestion: " +
                                         question + "\n"}};
        selection = parse_selection(gateway.chat(request, "summarize"));
    } catch (const Error& e) {
        return fallback("summarize_gateway_failed", e.what());
    }

    // Subset rule: anything the model named that is not in the catalog is
    // dropped, whatever else it got right.
    std::vector<std::pair<std::string, std::optional<std::string>>> valid;
    std::set<std::string> seen;
    for (const auto& entry : selection) {
        std::string name = trim(entry);
        size_t dot = name.find('.');
        std::string key = to_lower(name);
        if (seen.count(key)) continue;
        if (dot == std::string::npos) {
            const TableEntry* table = catalog.find_table(name);
            if (!table) continue;
            valid.emplace_back(table->name, std::nullopt);
        } else {
            const ColumnDescriptor* col =
                catalog.find_column(name.substr(0, dot), name.substr(dot + 1));
            if (!col) continue;
            valid.emplace_back(col->table_name, col->original_column_name);
        }
        seen.insert(key);
    }
    if (valid.empty()) {
        return fallback("summarize_empty_selection",
                        "model selected no valid schema element for question: " + question);
    }

    SchemaView view;
    view.source_db = catalog.db_id;
    // Catalog declaration order; table-level refs absorb column refs.
    for (const auto& table : catalog.tables) {
        bool whole = false;
        for (const auto& [t, c] : valid) {
            if (!c && iequals(t, table.name)) whole = true;
        }
        if (whole) {
            view.included.emplace_back(table.name, std::nullopt);
            continue;
        }
        for (const auto& c : table.columns) {
            for (const auto& [vt, vc] : valid) {
                if (vc && iequals(vt, table.name) && iequals(*vc, c.original_column_name)) {
                    view.included.emplace_back(table.name, c.original_column_name);
                }
            }
        }
    }
    view.rendered = render_view(catalog, view.included);

    if (estimate_tokens(view.rendered) > budget_tokens) {
        // Valid but oversize selection: keep its tables, question-relevant
        // first, and truncate to fit.
        std::vector<const TableEntry*> priority;
        for (const TableEntry* table : truncation_order(catalog, question)) {
            if (view.includes_table(table->name)) priority.push_back(table);
        }
        return truncate_to_budget(catalog, priority, budget_tokens);
    }
    return view;
}

std::vector<std::optional<SchemaView>> summarize_examples(
    const std::vector<QuestionRecord>& examples, const CatalogLookup& catalogs,
    std::size_t budget_tokens, LlmGateway& gateway, const std::string& model_id,
    Findings& findings, const std::string& prompt_dir) {
    std::vector<std::optional<SchemaView>> views;
    views.reserve(examples.size());
    for (const auto& example : examples) {
        const SchemaCatalog* catalog = catalogs(example.db_id);
        if (!catalog) {
            add_finding(findings, Finding::Severity::warning, "example_catalog_missing",
                        example.question_id + ": no catalog for database " + example.db_id +
                            "; example dropped from few-shot set");
            views.push_back(std::nullopt);
            continue;
        }
        views.push_back(summarize(*catalog, example.question, budget_tokens, gateway,
                                  model_id, findings, prompt_dir));
    }
    return views;
}

}  // namespace sqlev
