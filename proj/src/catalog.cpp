#include "sqlev/catalog.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sqlev/csv.hpp"
#include "sqlev/errors.hpp"
#include "sqlev/gateway.hpp"
#include "sqlev/prompts.hpp"
#include "sqlev/sqlite_db.hpp"
#include "sqlev/text.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace sqlev {

const char* value_kind_name(ValueKind k) {
    switch (k) {
        case ValueKind::text: return "text";
        case ValueKind::numeric: return "numeric";
        case ValueKind::temporal: return "temporal";
        case ValueKind::blob: return "blob";
        case ValueKind::mixed: return "mixed";
    }
    return "mixed";
}

ValueKind value_kind_from_name(const std::string& name) {
    if (name == "text") return ValueKind::text;
    if (name == "numeric") return ValueKind::numeric;
    if (name == "temporal") return ValueKind::temporal;
    if (name == "blob") return ValueKind::blob;
    return ValueKind::mixed;
}

const TableEntry* SchemaCatalog::find_table(const std::string& name) const {
    for (const auto& t : tables) {
        if (iequals(t.name, name)) return &t;
    }
    return nullptr;
}

const ColumnDescriptor* SchemaCatalog::find_column(const std::string& table,
                                                   const std::string& column) const {
    const TableEntry* t = find_table(table);
    if (!t) return nullptr;
    for (const auto& c : t->columns) {
        if (iequals(c.original_column_name, column)) return &c;
    }
    return nullptr;
}

std::vector<ColumnRef> SchemaCatalog::columns_named(const std::string& column) const {
    std::vector<ColumnRef> out;
    for (const auto& t : tables) {
        for (const auto& c : t.columns) {
            if (iequals(c.original_column_name, column)) {
                out.push_back({t.name, c.original_column_name});
            }
        }
    }
    return out;
}

const ValueProfile* SchemaCatalog::profile_for(const ColumnRef& ref) const {
    auto it = profiles.find(ref);
    if (it != profiles.end()) return &it->second;
    // Tolerate case differences between evidence text and physical names.
    for (const auto& [key, profile] : profiles) {
        if (iequals(key.table, ref.table) && iequals(key.column, ref.column)) return &profile;
    }
    return nullptr;
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

constexpr const char* kDescriptionHeader[] = {
    "original_column_name", "column_name", "column_description", "data_format",
    "value_description"};

bool looks_like_header(const CsvRow& row) {
    return !row.empty() && iequals(trim(row[0]), "original_column_name");
}

void apply_description_file(TableEntry& table, const std::string& csv_path,
                            Findings& findings) {
    std::vector<CsvRow> rows;
    try {
        rows = read_csv_file(csv_path);
    } catch (const DataError& e) {
        add_finding(findings, Finding::Severity::warning, "description_unreadable", e.what());
        return;
    }
    for (size_t i = 0; i < rows.size(); ++i) {
        const CsvRow& row = rows[i];
        if (i == 0 && looks_like_header(row)) continue;
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        if (row.size() < 5) {
            add_finding(findings, Finding::Severity::warning, "description_row_malformed",
                        csv_path + " row " + std::to_string(i + 1) + ": expected 5 fields, got " +
                            std::to_string(row.size()));
            continue;
        }
        std::string original = trim(row[0]);
        auto it = std::find_if(table.columns.begin(), table.columns.end(),
                               [&](const ColumnDescriptor& c) {
                                   return iequals(c.original_column_name, original);
                               });
        if (it == table.columns.end()) {
            add_finding(findings, Finding::Severity::warning, "description_unknown_column",
                        csv_path + " row " + std::to_string(i + 1) + ": no column named '" +
                            original + "' in table " + table.name);
            continue;
        }
        it->display_name = trim(row[1]);
        it->column_description = trim(row[2]);
        it->value_description = trim(row[4]);
    }
}

std::optional<std::string> description_file_for(const std::string& dir,
                                                const std::string& table) {
    fs::path exact = fs::path(dir) / (table + ".csv");
    std::error_code ec;
    if (fs::exists(exact, ec)) return exact.string();
    if (!fs::is_directory(dir, ec)) return std::nullopt;
    std::string wanted = to_lower(table + ".csv");
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (to_lower(entry.path().filename().string()) == wanted) {
            return entry.path().string();
        }
    }
    return std::nullopt;
}

ValueKind classify_from_declared(const std::string& declared) {
    std::string t = to_lower(declared);
    if (t.find("date") != std::string::npos || t.find("time") != std::string::npos)
        return ValueKind::temporal;
    if (t.find("int") != std::string::npos || t.find("real") != std::string::npos ||
        t.find("floa") != std::string::npos || t.find("doub") != std::string::npos ||
        t.find("num") != std::string::npos || t.find("dec") != std::string::npos)
        return ValueKind::numeric;
    if (t.find("blob") != std::string::npos) return ValueKind::blob;
    if (t.find("char") != std::string::npos || t.find("text") != std::string::npos ||
        t.find("clob") != std::string::npos)
        return ValueKind::text;
    return ValueKind::mixed;
}

ValueKind classify_values(const std::vector<std::vector<Value>>& rows,
                          const std::string& declared) {
    ValueKind declared_kind = classify_from_declared(declared);
    if (rows.empty()) return declared_kind;
    bool any_text = false, any_num = false, any_blob = false;
    for (const auto& row : rows) {
        switch (row[0].kind) {
            case Value::Kind::text: any_text = true; break;
            case Value::Kind::integer:
            case Value::Kind::real: any_num = true; break;
            case Value::Kind::blob: any_blob = true; break;
            case Value::Kind::null: break;
        }
    }
    int kinds = (any_text ? 1 : 0) + (any_num ? 1 : 0) + (any_blob ? 1 : 0);
    if (kinds != 1) return ValueKind::mixed;
    if (any_blob) return ValueKind::blob;
    if (declared_kind == ValueKind::temporal) return ValueKind::temporal;
    return any_num ? ValueKind::numeric : ValueKind::text;
}

ValueProfile profile_one_column(const Database& db, const std::string& table,
                                const ColumnDescriptor& column, int cap,
                                Findings& findings) {
    ValueProfile profile;
    profile.column = {table, column.original_column_name};

    std::string qcol = quote_ident(column.original_column_name);
    std::string qtable = quote_ident(table);
    std::string sample_sql = "SELECT DISTINCT " + qcol + " FROM " + qtable + " WHERE " + qcol +
                             " IS NOT NULL ORDER BY 1 LIMIT " + std::to_string(cap + 1);
    std::string count_sql =
        "SELECT COUNT(DISTINCT " + qcol + ") FROM " + qtable;

    QueryResult samples = db.run(sample_sql, {}, 10000, -1);
    QueryResult count = db.run(count_sql, {}, 10000, -1);
    if (samples.status != QueryResult::Status::ok ||
        count.status != QueryResult::Status::ok || count.rows.empty()) {
        profile.value_kind = ValueKind::mixed;
        add_finding(findings, Finding::Severity::warning, "profile_query_failed",
                    table + "." + column.original_column_name + ": " +
                        (samples.status != QueryResult::Status::ok ? samples.error_message
                                                                   : count.error_message));
        return profile;
    }

    profile.distinct_count = count.rows[0][0].i;
    profile.is_capped = profile.distinct_count > cap;
    size_t keep = std::min<size_t>(samples.rows.size(), static_cast<size_t>(cap));
    profile.sampled_values.reserve(keep);
    for (size_t i = 0; i < keep; ++i) {
        profile.sampled_values.push_back(samples.rows[i][0].render());
    }
    profile.value_kind = classify_values(samples.rows, column.declared_type);
    return profile;
}

}  // namespace

SchemaCatalog load_catalog(const std::string& db_path,
                           const std::optional<std::string>& description_dir,
                           Findings& findings) {
    SchemaCatalog catalog;
    catalog.db_path = db_path;
    catalog.db_id = fs::path(db_path).stem().string();

    Database db = Database::open_read_only(db_path);

    QueryResult tables = db.run(
        "SELECT name FROM sqlite_master WHERE type='table' "
        "AND name NOT LIKE 'sqlite\\_%' ESCAPE '\\' ORDER BY rowid",
        {}, 10000, -1);
    if (tables.status != QueryResult::Status::ok) {
        throw DataError("cannot enumerate tables of " + db_path + ": " + tables.error_message);
    }

    for (const auto& row : tables.rows) {
        TableEntry table;
        table.name = row[0].s;

        QueryResult info =
            db.run("PRAGMA table_info(" + quote_ident(table.name) + ")", {}, 10000, -1);
        if (info.status != QueryResult::Status::ok) {
            throw DataError("PRAGMA table_info failed for " + table.name + ": " +
                            info.error_message);
        }
        // table_info columns: cid, name, type, notnull, dflt_value, pk
        for (const auto& col : info.rows) {
            ColumnDescriptor c;
            c.table_name = table.name;
            c.original_column_name = col[1].s;
            c.declared_type = col[2].s;
            c.is_primary_key = col[5].i > 0;
            table.columns.push_back(std::move(c));
        }
        catalog.tables.push_back(std::move(table));
    }

    // Foreign keys come from the database's own metadata. A reference to a
    // table or column missing from the catalog is dropped with a finding so
    // the foreign_refs invariant holds.
    for (auto& table : catalog.tables) {
        QueryResult fks =
            db.run("PRAGMA foreign_key_list(" + quote_ident(table.name) + ")", {}, 10000, -1);
        if (fks.status != QueryResult::Status::ok) continue;
        // foreign_key_list columns: id, seq, table, from, to, ...
        for (const auto& fk : fks.rows) {
            const std::string& ref_table = fk[2].s;
            const std::string& from_col = fk[3].s;
            std::string to_col = fk[4].kind == Value::Kind::text ? fk[4].s : "";

            const TableEntry* target = catalog.find_table(ref_table);
            if (!target) {
                add_finding(findings, Finding::Severity::warning, "fk_unknown_table",
                            table.name + "." + from_col + " references missing table " +
                                ref_table);
                continue;
            }
            if (to_col.empty()) {
                // Implicit reference to the target's primary key.
                for (const auto& c : target->columns) {
                    if (c.is_primary_key) {
                        to_col = c.original_column_name;
                        break;
                    }
                }
            }
            if (to_col.empty() || !catalog.find_column(ref_table, to_col)) {
                add_finding(findings, Finding::Severity::warning, "fk_unknown_column",
                            table.name + "." + from_col + " references missing column " +
                                ref_table + "." + to_col);
                continue;
            }
            for (auto& c : table.columns) {
                if (iequals(c.original_column_name, from_col)) {
                    c.foreign_refs.push_back({target->name, to_col});
                }
            }
        }
    }

    if (description_dir) {
        for (auto& table : catalog.tables) {
            auto file = description_file_for(*description_dir, table.name);
            if (file) apply_description_file(table, *file, findings);
        }
    }
    return catalog;
}

SchemaCatalog profile_values(SchemaCatalog catalog, int cap, Findings& findings,
                             int parallelism) {
    if (cap <= 0) throw InvalidArgument("distinct-value cap must be positive");

    struct Job {
        const std::string* table;
        const ColumnDescriptor* column;
    };
    std::vector<Job> jobs;
    for (const auto& table : catalog.tables) {
        for (const auto& column : table.columns) {
            jobs.push_back({&table.name, &column});
        }
    }

    std::vector<ValueProfile> results(jobs.size());
    std::vector<Findings> job_findings(jobs.size());

    int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(jobs.size())));
    if (workers <= 1) {
        Database db = Database::open_read_only(catalog.db_path);
        for (size_t i = 0; i < jobs.size(); ++i) {
            results[i] =
                profile_one_column(db, *jobs[i].table, *jobs[i].column, cap, job_findings[i]);
        }
    } else {
        // Independent read-only connection per worker; results land in
        // per-job slots and are merged by this single collector afterwards.
        std::atomic<size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                Database db = Database::open_read_only(catalog.db_path);
                while (true) {
                    size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) break;
                    results[i] = profile_one_column(db, *jobs[i].table, *jobs[i].column, cap,
                                                    job_findings[i]);
                }
            });
        }
        for (auto& t : threads) t.join();
    }

    for (size_t i = 0; i < jobs.size(); ++i) {
        for (auto& f : job_findings[i]) findings.push_back(std::move(f));
        catalog.profiles[results[i].column] = std::move(results[i]);
    }
    return catalog;
}

namespace {

ordered_json catalog_to_json(const SchemaCatalog& catalog) {
    ordered_json doc;
    doc["db_id"] = catalog.db_id;
    doc["db_path"] = catalog.db_path;
    doc["tables"] = ordered_json::array();
    for (const auto& table : catalog.tables) {
        ordered_json jt;
        jt["name"] = table.name;
        jt["columns"] = ordered_json::array();
        for (const auto& c : table.columns) {
            ordered_json jc;
            jc["original_column_name"] = c.original_column_name;
            jc["display_name"] = c.display_name;
            jc["declared_type"] = c.declared_type;
            jc["column_description"] = c.column_description;
            jc["value_description"] = c.value_description;
            jc["is_primary_key"] = c.is_primary_key;
            jc["foreign_refs"] = ordered_json::array();
            for (const auto& fk : c.foreign_refs) {
                jc["foreign_refs"].push_back({{"table", fk.table}, {"column", fk.column}});
            }
            jt["columns"].push_back(std::move(jc));
        }
        doc["tables"].push_back(std::move(jt));
    }
    doc["profiles"] = ordered_json::array();
    for (const auto& [ref, profile] : catalog.profiles) {
        ordered_json jp;
        jp["table"] = ref.table;
        jp["column"] = ref.column;
        jp["distinct_count"] = profile.distinct_count;
        jp["sampled_values"] = profile.sampled_values;
        jp["is_capped"] = profile.is_capped;
        jp["value_kind"] = value_kind_name(profile.value_kind);
        doc["profiles"].push_back(std::move(jp));
    }
    return doc;
}

}  // namespace

std::string catalog_to_text(const SchemaCatalog& catalog) {
    return catalog_to_json(catalog).dump(2) + "\n";
}

SchemaCatalog catalog_from_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid catalog cache: ") + e.what());
    }
    SchemaCatalog catalog;
    try {
        catalog.db_id = doc.at("db_id").get<std::string>();
        catalog.db_path = doc.at("db_path").get<std::string>();
        for (const auto& jt : doc.at("tables")) {
            TableEntry table;
            table.name = jt.at("name").get<std::string>();
            for (const auto& jc : jt.at("columns")) {
                ColumnDescriptor c;
                c.table_name = table.name;
                c.original_column_name = jc.at("original_column_name").get<std::string>();
                c.display_name = jc.at("display_name").get<std::string>();
                c.declared_type = jc.at("declared_type").get<std::string>();
                c.column_description = jc.at("column_description").get<std::string>();
                c.value_description = jc.at("value_description").get<std::string>();
                c.is_primary_key = jc.at("is_primary_key").get<bool>();
                for (const auto& jf : jc.at("foreign_refs")) {
                    c.foreign_refs.push_back({jf.at("table").get<std::string>(),
                                              jf.at("column").get<std::string>()});
                }
                table.columns.push_back(std::move(c));
            }
            catalog.tables.push_back(std::move(table));
        }
        for (const auto& jp : doc.at("profiles")) {
            ValueProfile profile;
            profile.column = {jp.at("table").get<std::string>(),
                              jp.at("column").get<std::string>()};
            profile.distinct_count = jp.at("distinct_count").get<std::int64_t>();
            profile.sampled_values =
                jp.at("sampled_values").get<std::vector<std::string>>();
            profile.is_capped = jp.at("is_capped").get<bool>();
            profile.value_kind = value_kind_from_name(jp.at("value_kind").get<std::string>());
            catalog.profiles[profile.column] = std::move(profile);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid catalog cache: ") + e.what());
    }
    return catalog;
}

void save_catalog_cache(const SchemaCatalog& catalog, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write catalog cache: " + path);
    out << catalog_to_text(catalog);
}

SchemaCatalog load_catalog_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read catalog cache: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return catalog_from_text(ss.str());
}

void synthesize_descriptions(const SchemaCatalog& catalog, LlmGateway& gateway,
                             const std::string& model_id, const std::string& out_dir,
                             Findings& findings) {
    fs::create_directories(out_dir);
    for (const auto& table : catalog.tables) {
        std::vector<CsvRow> rows;
        rows.push_back({kDescriptionHeader[0], kDescriptionHeader[1], kDescriptionHeader[2],
                        kDescriptionHeader[3], kDescriptionHeader[4]});

        if (!table.columns.empty()) {
            std::ostringstream schema;
            schema << "Table: " << table.name << "\n";
            for (const auto& c : table.columns) {
                schema << "  " << c.original_column_name << " " << c.declared_type;
                const ValueProfile* p = catalog.profile_for({table.name, c.original_column_name});
                if (p && !p->sampled_values.empty()) {
                    schema << "  examples: ";
                    for (size_t i = 0; i < std::min<size_t>(p->sampled_values.size(), 5); ++i) {
                        if (i) schema << ", ";
                        schema << p->sampled_values[i];
                    }
                }
                schema << "\n";
            }

            std::map<std::string, CsvRow> by_column;
            try {
                ChatRequest request;
                request.model_id = model_id;
                request.messages = {{"user", std::string(prompts::kDescribeTable) + "\n\n" +
                                                 schema.str()}};
                std::string reply = gateway.chat(request, "describe");
                for (auto& row : parse_csv(reply)) {
                    if (row.size() < 5 || looks_like_header(row)) continue;
                    std::string name = trim(row[0]);
                    const ColumnDescriptor* col = catalog.find_column(table.name, name);
                    if (!col) {
                        add_finding(findings, Finding::Severity::warning,
                                    "description_hallucinated_column",
                                    table.name + ": generated row names unknown column '" +
                                        name + "'");
                        continue;
                    }
                    by_column[to_lower(col->original_column_name)] = row;
                }
            } catch (const Error& e) {
                add_finding(findings, Finding::Severity::error, "description_generation_failed",
                            table.name + ": " + e.what());
            }

            for (const auto& c : table.columns) {
                auto it = by_column.find(to_lower(c.original_column_name));
                if (it != by_column.end()) {
                    rows.push_back({c.original_column_name, trim(it->second[1]),
                                    trim(it->second[2]), trim(it->second[3]),
                                    trim(it->second[4])});
                } else {
                    rows.push_back({c.original_column_name, c.original_column_name, "",
                                    to_lower(c.declared_type), ""});
                }
            }
        }
        write_csv_file((fs::path(out_dir) / (table.name + ".csv")).string(), rows);
    }
}

}  // namespace sqlev
