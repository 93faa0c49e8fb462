#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqlev/finding.hpp"

namespace sqlev {

class LlmGateway;

struct ColumnRef {
    std::string table;
    std::string column;
    bool operator==(const ColumnRef&) const = default;
    auto operator<=>(const ColumnRef&) const = default;
    std::string qualified() const { return table + "." + column; }
};

struct ForeignRef {
    std::string table;
    std::string column;
    bool operator==(const ForeignRef&) const = default;
};

struct ColumnDescriptor {
    std::string table_name;
    std::string original_column_name;  // as stored in the database
    std::string display_name;          // human-readable, from the description file
    std::string declared_type;
    std::string column_description;
    std::string value_description;
    bool is_primary_key = false;
    std::vector<ForeignRef> foreign_refs;
};

enum class ValueKind { text, numeric, temporal, blob, mixed };
const char* value_kind_name(ValueKind k);
ValueKind value_kind_from_name(const std::string& name);

struct ValueProfile {
    ColumnRef column;
    std::int64_t distinct_count = 0;
    std::vector<std::string> sampled_values;  // rendered literals, capped
    bool is_capped = false;                   // distinct_count exceeds the cap
    ValueKind value_kind = ValueKind::mixed;
};

struct TableEntry {
    std::string name;
    std::vector<ColumnDescriptor> columns;  // physical declaration order
};

// Immutable after construction; safe for concurrent readers.
struct SchemaCatalog {
    std::string db_id;
    std::string db_path;
    std::vector<TableEntry> tables;  // physical declaration order
    std::map<ColumnRef, ValueProfile> profiles;

    const TableEntry* find_table(const std::string& name) const;        // case-insensitive
    const ColumnDescriptor* find_column(const std::string& table,
                                        const std::string& column) const;
    // Any table owning a column with this name, in declaration order.
    std::vector<ColumnRef> columns_named(const std::string& column) const;
    const ValueProfile* profile_for(const ColumnRef& ref) const;
    bool has_table(const std::string& name) const { return find_table(name) != nullptr; }
};

// Reads the physical schema plus optional BIRD-style description CSVs
// (one `<table>.csv` per table). Defective description rows are skipped
// with a finding; they never abort ingestion.
SchemaCatalog load_catalog(const std::string& db_path,
                           const std::optional<std::string>& description_dir,
                           Findings& findings);

// Populates one ValueProfile per column: SELECT DISTINCT with deterministic
// ORDER BY 1 and LIMIT cap+1, plus an exact COUNT(DISTINCT) pass. Per-column
// failures degrade to an empty mixed profile with a finding.
SchemaCatalog profile_values(SchemaCatalog catalog, int cap, Findings& findings,
                             int parallelism = 1);

// Description synthesis for databases without description files. Emits one
// BIRD-layout CSV per table into out_dir; rows naming unknown columns are
// dropped with a finding.
void synthesize_descriptions(const SchemaCatalog& catalog, LlmGateway& gateway,
                             const std::string& model_id, const std::string& out_dir,
                             Findings& findings);

// Catalog cache: one structured-text document per database, stable field
// order, lossless round-trip.
std::string catalog_to_text(const SchemaCatalog& catalog);
SchemaCatalog catalog_from_text(const std::string& text);  // throws DataError
void save_catalog_cache(const SchemaCatalog& catalog, const std::string& path);
SchemaCatalog load_catalog_cache(const std::string& path);

}  // namespace sqlev
