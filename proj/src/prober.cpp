#include "sqlev/prober.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "sqlev/errors.hpp"
#include "sqlev/gateway.hpp"
#include "sqlev/prompts.hpp"
#include "sqlev/sqlite_db.hpp"
#include "sqlev/text.hpp"

namespace sqlev {

const char* keyword_kind_name(KeywordKind k) {
    switch (k) {
        case KeywordKind::column_ref: return "column_ref";
        case KeywordKind::value_literal: return "value_literal";
        case KeywordKind::ambiguous: return "ambiguous";
    }
    return "ambiguous";
}

const char* probe_kind_name(ProbeKind k) {
    switch (k) {
        case ProbeKind::distinct: return "distinct";
        case ProbeKind::like: return "like";
        case ProbeKind::edit_distance: return "edit_distance";
    }
    return "distinct";
}

const char* probe_status_name(ProbeStatus s) {
    switch (s) {
        case ProbeStatus::ok: return "ok";
        case ProbeStatus::timeout: return "timeout";
        case ProbeStatus::error: return "error";
    }
    return "error";
}

std::int64_t edit_distance(std::string_view a, std::string_view b) {
    std::u32string ua = utf8_decode(a);
    std::u32string ub = utf8_decode(b);
    if (ua.empty()) return static_cast<std::int64_t>(ub.size());
    if (ub.empty()) return static_cast<std::int64_t>(ua.size());

    std::vector<std::int64_t> prev(ub.size() + 1), cur(ub.size() + 1);
    for (size_t j = 0; j <= ub.size(); ++j) prev[j] = static_cast<std::int64_t>(j);
    for (size_t i = 1; i <= ua.size(); ++i) {
        cur[0] = static_cast<std::int64_t>(i);
        for (size_t j = 1; j <= ub.size(); ++j) {
            std::int64_t substitute = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
        }
        std::swap(prev, cur);
    }
    return prev[ub.size()];
}

namespace {

const std::set<std::string>& forbidden_verbs() {
    static const std::set<std::string> verbs = {
        "INSERT", "UPDATE", "DELETE",   "DROP",    "CREATE", "ALTER",  "REPLACE",
        "ATTACH", "DETACH", "PRAGMA",   "VACUUM",  "REINDEX", "ANALYZE",
        "BEGIN",  "COMMIT", "ROLLBACK", "SAVEPOINT", "RELEASE", "GRANT", "REVOKE",
        "TRUNCATE"};
    return verbs;
}

// Word tokens of the statement outside string literals, quoted identifiers
// and comments. Also reports whether a semicolon separates two statements.
struct SqlScan {
    std::vector<std::string> words;
    bool multiple_statements = false;
};

SqlScan scan_sql(const std::string& sql) {
    SqlScan out;
    std::string word;
    bool any_content = false;
    bool semicolon_after_content = false;

    // Any token, literal or operator after a content-terminating semicolon
    // means a second statement.
    auto content = [&] {
        if (semicolon_after_content) out.multiple_statements = true;
        any_content = true;
    };
    auto flush = [&] {
        if (!word.empty()) {
            out.words.push_back(to_lower(word));
            word.clear();
        }
    };

    for (size_t i = 0; i < sql.size(); ++i) {
        char c = sql[i];
        if (c == '\'' || c == '"' || c == '`') {
            flush();
            content();
            char quote = c;
            ++i;
            while (i < sql.size()) {
                if (sql[i] == quote) {
                    if (i + 1 < sql.size() && sql[i + 1] == quote) {
                        i += 2;  // doubled quote escape
                        continue;
                    }
                    break;
                }
                ++i;
            }
            continue;
        }
        if (c == '[') {  // bracket-quoted identifier
            flush();
            content();
            while (i < sql.size() && sql[i] != ']') ++i;
            continue;
        }
        if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
            flush();
            while (i < sql.size() && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < sql.size() && sql[i + 1] == '*') {
            flush();
            i += 2;
            while (i + 1 < sql.size() && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
            ++i;
            continue;
        }
        if (c == ';') {
            flush();
            if (any_content) semicolon_after_content = true;
            continue;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            if (word.empty()) content();
            word.push_back(c);
        } else {
            flush();
            if (!std::isspace(static_cast<unsigned char>(c))) content();
        }
    }
    flush();
    return out;
}

}  // namespace

bool validate_read_only(const std::string& sql, std::string* why) {
    auto fail = [&](const std::string& reason) {
        if (why) *why = reason;
        return false;
    };
    SqlScan scan = scan_sql(sql);
    if (scan.words.empty()) return fail("empty statement");
    if (scan.multiple_statements) return fail("multiple statements are not allowed");
    if (scan.words.front() != "select" && scan.words.front() != "with") {
        return fail("statement must begin with SELECT");
    }
    if (scan.words.front() == "with" &&
        std::find(scan.words.begin(), scan.words.end(), "select") == scan.words.end()) {
        return fail("WITH clause without a SELECT body");
    }
    for (const auto& word : scan.words) {
        std::string upper;
        upper.reserve(word.size());
        for (char c : word) upper.push_back(static_cast<char>(std::toupper(c)));
        if (forbidden_verbs().count(upper)) {
            return fail("forbidden verb: " + upper);
        }
    }
    return true;
}

namespace {

std::string quote_ident(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// First case-insensitive occurrence of `surface` in `question`, or npos.
size_t find_ci(const std::string& question, const std::string& surface) {
    if (surface.empty() || surface.size() > question.size()) return std::string::npos;
    for (size_t i = 0; i + surface.size() <= question.size(); ++i) {
        if (iequals(std::string_view(question).substr(i, surface.size()), surface)) return i;
    }
    return std::string::npos;
}

struct RawCandidate {
    std::string surface;
    KeywordKind kind;
    std::vector<ColumnRef> matched;
};

void merge_candidate(std::vector<RawCandidate>& list, RawCandidate candidate) {
    for (auto& existing : list) {
        if (iequals(existing.surface, candidate.surface)) {
            if (existing.kind != candidate.kind) existing.kind = KeywordKind::ambiguous;
            for (auto& ref : candidate.matched) {
                if (std::find(existing.matched.begin(), existing.matched.end(), ref) ==
                    existing.matched.end()) {
                    existing.matched.push_back(ref);
                }
            }
            return;
        }
    }
    list.push_back(std::move(candidate));
}

std::vector<KeywordCandidate> finalize_candidates(const std::string& question,
                                                  std::vector<RawCandidate> raw) {
    // Sort by first occurrence; drop anything that is not a question substring.
    std::vector<std::pair<size_t, KeywordCandidate>> positioned;
    for (auto& c : raw) {
        size_t pos = find_ci(question, c.surface);
        if (pos == std::string::npos) continue;
        positioned.push_back({pos, KeywordCandidate{c.surface, c.kind, std::move(c.matched)}});
    }
    std::stable_sort(positioned.begin(), positioned.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<KeywordCandidate> out;
    out.reserve(positioned.size());
    for (auto& [pos, candidate] : positioned) out.push_back(std::move(candidate));
    return out;
}

// Deterministic keyword fallback: question n-grams of 1..4 tokens matched
// against normalized column names and profiled values.
std::vector<RawCandidate> fallback_keywords(const std::string& question,
                                            const SchemaCatalog& catalog) {
    struct Span {
        size_t begin, end;
    };
    std::vector<Span> token_spans;
    size_t i = 0;
    while (i < question.size()) {
        unsigned char c = static_cast<unsigned char>(question[i]);
        if (std::isalnum(c) || question[i] == '_') {
            size_t begin = i;
            while (i < question.size() &&
                   (std::isalnum(static_cast<unsigned char>(question[i])) ||
                    question[i] == '_'))
                ++i;
            token_spans.push_back({begin, i});
        } else {
            ++i;
        }
    }

    auto normalize = [](std::string_view s) {
        std::string out = to_lower(s);
        for (char& c : out) {
            if (c == '_') c = ' ';
        }
        return out;
    };

    // Normalized column name -> refs.
    std::map<std::string, std::vector<ColumnRef>> column_names;
    for (const auto& table : catalog.tables) {
        for (const auto& c : table.columns) {
            column_names[normalize(c.original_column_name)].push_back(
                {table.name, c.original_column_name});
            if (!c.display_name.empty()) {
                column_names[normalize(c.display_name)].push_back(
                    {table.name, c.original_column_name});
            }
        }
    }
    // Normalized profiled text value -> refs.
    std::map<std::string, std::vector<ColumnRef>> values;
    for (const auto& [ref, profile] : catalog.profiles) {
        if (profile.value_kind != ValueKind::text) continue;
        for (const auto& v : profile.sampled_values) {
            values[normalize(v)].push_back(ref);
        }
    }

    std::vector<RawCandidate> raw;
    for (size_t a = 0; a < token_spans.size(); ++a) {
        for (size_t len = 1; len <= 4 && a + len <= token_spans.size(); ++len) {
            size_t begin = token_spans[a].begin;
            size_t end = token_spans[a + len - 1].end;
            std::string surface = question.substr(begin, end - begin);
            std::string key = normalize(surface);

            auto col_it = column_names.find(key);
            if (col_it != column_names.end()) {
                merge_candidate(raw, {surface, KeywordKind::column_ref, col_it->second});
            }
            auto val_it = values.find(key);
            if (val_it != values.end()) {
                merge_candidate(raw, {surface, KeywordKind::value_literal, val_it->second});
            }
        }
    }
    return raw;
}

std::vector<RawCandidate> llm_keywords(const std::string& question,
                                       const SchemaCatalog& catalog, LlmGateway& gateway,
                                       const std::string& model_id,
                                       const std::string& prompt_dir) {
    std::ostringstream schema;
    for (const auto& table : catalog.tables) {
        schema << table.name << "(";
        for (size_t i = 0; i < table.columns.size(); ++i) {
            if (i) schema << ", ";
            schema << table.columns[i].original_column_name;
        }
        schema << ")\n";
    }

    ChatRequest request;
    request.model_id = model_id;
    std::string instruction =
        prompts::load(prompt_dir, "keyword_extract.txt", prompts::kKeywordExtract);
    request.messages = {{"user", instruction + "\nSchema:\n" + schema.str() + "\nQuestion: " +
                                     question + "\n"}};
    std::string reply = gateway.chat(request, "keywords");

    size_t begin = reply.find('{');
    size_t end = reply.rfind('}');
    if (begin == std::string::npos || end == std::string::npos || end < begin) return {};

    std::vector<RawCandidate> raw;
    try {
        auto doc = nlohmann::json::parse(reply.substr(begin, end - begin + 1));
        auto read_group = [&](const char* field, KeywordKind kind) {
            if (!doc.contains(field) || !doc[field].is_array()) return;
            for (const auto& item : doc[field]) {
                if (!item.is_object() || !item.contains("keyword")) continue;
                RawCandidate candidate;
                candidate.surface = item.value("keyword", "");
                candidate.kind = kind;
                std::string table = item.value("table", "");
                std::string column = item.value("column", "");
                if (const ColumnDescriptor* col = catalog.find_column(table, column)) {
                    candidate.matched.push_back({col->table_name, col->original_column_name});
                } else if (!column.empty()) {
                    // Model gave a bare or mislabeled column; keep any catalog
                    // column with that name.
                    for (auto& ref : catalog.columns_named(column)) {
                        candidate.matched.push_back(ref);
                    }
                }
                merge_candidate(raw, std::move(candidate));
            }
        };
        read_group("columns", KeywordKind::column_ref);
        read_group("values", KeywordKind::value_literal);
    } catch (const nlohmann::json::exception&) {
        return {};
    }
    return raw;
}

}  // namespace

std::vector<KeywordCandidate> extract_keywords(const std::string& question,
                                               const SchemaCatalog& catalog,
                                               LlmGateway* gateway,
                                               const std::string& model_id,
                                               Findings& findings,
                                               const std::string& prompt_dir) {
    if (trim(question).empty()) return {};

    if (gateway) {
        try {
            auto raw = llm_keywords(question, catalog, *gateway, model_id, prompt_dir);
            if (!raw.empty()) return finalize_candidates(question, std::move(raw));
            add_finding(findings, Finding::Severity::info, "keywords_empty_reply",
                        "model proposed no usable keyword; falling back to n-gram matching");
        } catch (const Error& e) {
            add_finding(findings, Finding::Severity::warning, "keywords_gateway_failed",
                        std::string(e.what()) + "; falling back to n-gram matching");
        }
    }
    return finalize_candidates(question, fallback_keywords(question, catalog));
}

std::vector<ProbeSpec> build_probes(const std::vector<KeywordCandidate>& candidates,
                                    const SchemaCatalog& catalog, const ProbeCaps& caps,
                                    Findings& findings) {
    std::vector<ProbeSpec> specs;
    std::set<std::string> seen;  // dedup key per probe

    auto push = [&](ProbeSpec spec) {
        if (static_cast<int>(specs.size()) >= caps.probe_count) return false;
        std::string key = std::string(probe_kind_name(spec.kind)) + "|" +
                          to_lower(spec.target.table) + "|" + to_lower(spec.target.column) +
                          "|" + (spec.literal ? to_lower(*spec.literal) : "");
        if (!seen.insert(key).second) return true;
        specs.push_back(std::move(spec));
        return true;
    };

    for (const auto& candidate : candidates) {
        for (const auto& ref : candidate.matched_columns) {
            const ColumnDescriptor* col = catalog.find_column(ref.table, ref.column);
            if (!col) continue;  // candidates are validated, but stay defensive
            const ValueProfile* profile = catalog.profile_for(ref);
            bool is_text = profile && profile->value_kind == ValueKind::text;

            if (candidate.kind != KeywordKind::value_literal) {
                ProbeSpec spec;
                spec.kind = ProbeKind::distinct;
                spec.target = ref;
                spec.sql = "SELECT DISTINCT " + quote_ident(ref.column) + " FROM " +
                           quote_ident(ref.table) + " WHERE " + quote_ident(ref.column) +
                           " IS NOT NULL ORDER BY 1 LIMIT 20";
                if (!push(std::move(spec))) return specs;
            }
            if (candidate.kind != KeywordKind::column_ref) {
                if (!is_text) {
                    add_finding(findings, Finding::Severity::info, "probe_skipped_non_text",
                                "literal '" + candidate.surface + "' targets non-text column " +
                                    ref.qualified() + "; LIKE/edit-distance probes skipped");
                    continue;
                }
                ProbeSpec like;
                like.kind = ProbeKind::like;
                like.target = ref;
                like.literal = candidate.surface;
                like.sql = "SELECT DISTINCT " + quote_ident(ref.column) + " FROM " +
                           quote_ident(ref.table) + " WHERE " + quote_ident(ref.column) +
                           " LIKE '%'||?||'%' COLLATE NOCASE ORDER BY 1 LIMIT 20";
                if (!push(std::move(like))) return specs;

                // Client-side Levenshtein over the profiled distinct values.
                ProbeSpec similar;
                similar.kind = ProbeKind::edit_distance;
                similar.target = ref;
                similar.literal = candidate.surface;
                similar.sql = "SELECT DISTINCT " + quote_ident(ref.column) + " FROM " +
                              quote_ident(ref.table) + " WHERE " + quote_ident(ref.column) +
                              " IS NOT NULL ORDER BY 1 LIMIT 20";
                if (!push(std::move(similar))) return specs;
            }
        }
    }
    return specs;
}

namespace {

ProbeResult execute_one_probe(const ProbeSpec& spec, const std::string& db_path,
                              int timeout_ms, int row_cap, int edit_distance_k) {
    ProbeResult result;
    result.spec = spec;

    std::string why;
    if (!validate_read_only(spec.sql, &why)) {
        result.status = ProbeStatus::error;
        result.error_message = "rejected by read-only validator: " + why;
        return result;
    }

    try {
        Database db = Database::open_read_only(db_path);
        std::vector<std::string> params;
        if (spec.kind == ProbeKind::like && spec.literal) params.push_back(*spec.literal);

        // Edit-distance probes rank client-side, so fetch the distinct set
        // uncapped (the SQL itself carries the profile LIMIT).
        long long cap = spec.kind == ProbeKind::edit_distance ? -1 : row_cap;
        QueryResult query = db.run(spec.sql, params, timeout_ms, cap);
        result.elapsed_ms = query.elapsed_ms;
        switch (query.status) {
            case QueryResult::Status::ok: result.status = ProbeStatus::ok; break;
            case QueryResult::Status::timeout: result.status = ProbeStatus::timeout; return result;
            case QueryResult::Status::error:
                result.status = ProbeStatus::error;
                result.error_message = query.error_message;
                return result;
        }

        if (spec.kind == ProbeKind::edit_distance && spec.literal) {
            // Top-k nearest profiled values; ties break lexicographically.
            std::vector<std::pair<std::int64_t, std::string>> scored;
            for (const auto& row : query.rows) {
                std::string rendered = row[0].render();
                scored.push_back({edit_distance(*spec.literal, rendered), rendered});
            }
            std::sort(scored.begin(), scored.end());
            size_t keep = std::min<size_t>(scored.size(),
                                           static_cast<size_t>(std::max(edit_distance_k, 0)));
            for (size_t i = 0; i < keep; ++i) result.rows.push_back(scored[i].second);
            result.truncated = scored.size() > keep;
        } else {
            for (const auto& row : query.rows) result.rows.push_back(row[0].render());
            result.truncated = query.truncated;
        }
    } catch (const Error& e) {
        result.status = ProbeStatus::error;
        result.error_message = e.what();
    }
    return result;
}

}  // namespace

std::vector<ProbeResult> execute_probes(const std::vector<ProbeSpec>& specs,
                                        const SchemaCatalog& catalog, int timeout_ms,
                                        int row_cap, int parallelism, int edit_distance_k) {
    std::vector<ProbeResult> results(specs.size());
    int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(specs.size())));
    if (workers <= 1) {
        for (size_t i = 0; i < specs.size(); ++i) {
            results[i] = execute_one_probe(specs[i], catalog.db_path, timeout_ms, row_cap,
                                           edit_distance_k);
        }
        return results;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= specs.size()) break;
                results[i] = execute_one_probe(specs[i], catalog.db_path, timeout_ms, row_cap,
                                               edit_distance_k);
            }
        });
    }
    for (auto& t : threads) t.join();
    return results;
}

std::string render_transcript(const std::vector<ProbeResult>& results) {
    std::ostringstream out;
    for (const auto& r : results) {
        out << "[";
        switch (r.spec.kind) {
            case ProbeKind::distinct: out << "distinct values"; break;
            case ProbeKind::like: out << "like '" << r.spec.literal.value_or("") << "'"; break;
            case ProbeKind::edit_distance:
                out << "similar to '" << r.spec.literal.value_or("") << "'";
                break;
        }
        out << "] " << r.spec.target.qualified() << ": ";
        if (r.status != ProbeStatus::ok) {
            out << "<" << probe_status_name(r.status) << ">";
        } else if (r.rows.empty()) {
            out << "<no rows>";
        } else {
            for (size_t i = 0; i < r.rows.size(); ++i) {
                if (i) out << " | ";
                out << r.rows[i];
            }
            if (r.truncated) out << " | ...";
        }
        out << "\n";
    }
    return out.str();
}

nlohmann::ordered_json transcript_to_json(const std::vector<ProbeResult>& results) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json entry;
        entry["sql"] = r.spec.sql;
        entry["parameters"] =
            r.spec.kind == ProbeKind::like && r.spec.literal
                ? nlohmann::ordered_json::array({*r.spec.literal})
                : nlohmann::ordered_json::array();
        entry["kind"] = probe_kind_name(r.spec.kind);
        entry["table"] = r.spec.target.table;
        entry["column"] = r.spec.target.column;
        if (r.spec.literal) entry["literal"] = *r.spec.literal;
        entry["status"] = probe_status_name(r.status);
        entry["rows"] = r.rows;
        entry["truncated"] = r.truncated;
        entry["elapsed_ms"] = r.elapsed_ms;
        if (!r.error_message.empty()) entry["error"] = r.error_message;
        doc.push_back(std::move(entry));
    }
    return doc;
}

}  // namespace sqlev
