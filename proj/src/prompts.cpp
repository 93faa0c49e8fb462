#include "sqlev/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace sqlev::prompts {

const std::string_view kEvidenceFullSchema =
    R"(You are a database expert preparing evidence for a text-to-SQL system.
Evidence is a short set of hints that maps phrases of the question to concrete
schema elements, database values, or formulas, in the style:
  <question phrase> refers to <table>.<column> = '<value>';
  <concept> refers to <formula or column>;
Write one clause per hint and terminate every clause with ";".
Use only tables, columns and values that appear in the schema and sample query
results below. Copy stored values exactly, including their letter case.
Do not write SQL. Do not explain. Output only the evidence clauses.
)";

const std::string_view kEvidenceSummarized =
    R"(You are a database expert preparing evidence for a text-to-SQL system.
Evidence is a short set of hints that maps phrases of the question to concrete
schema elements, database values, or formulas, in the style:
  <question phrase> refers to <table>.<column> = '<value>';
  <concept> refers to <formula or column>;
Write one clause per hint and terminate every clause with ";".
The schema below was reduced to the elements relevant to the question; use only
tables, columns and values that appear in it or in the sample query results.
Copy stored values exactly, including their letter case.
Do not write SQL. Do not explain. Output only the evidence clauses.
)";

const std::string_view kSchemaSummarize =
    R"(You select the parts of a database schema that are relevant to a question.
Given the schema and the question below, reply with a JSON array listing the
relevant table names. An entry may also be "table.column" to keep a single
column. Keep every table that could plausibly be needed to answer the
question, and nothing else. Reply with the JSON array only.
)";

const std::string_view kKeywordExtract =
    R"(You extract keywords from a question about a database. A keyword is a
phrase copied verbatim from the question that names either a database column
or a stored value. Reply with JSON of the shape:
{"columns": [{"keyword": "...", "table": "...", "column": "..."}],
 "values":  [{"keyword": "...", "table": "...", "column": "..."}]}
where "keyword" is the exact question phrase and table/column name the most
likely schema element it refers to. Use only tables and columns from the
schema below. Reply with the JSON object only.
)";

const std::string_view kDescribeTable =
    R"(You document a database table. For every column of the table below,
write one CSV row with exactly these five fields:
original_column_name,column_name,column_description,data_format,value_description
Use the physical column name in the first field, a human-readable name in the
second, a one-sentence description in the third, the storage type in the
fourth, and an explanation of the stored values (including what specific codes
stand for) in the fifth. Quote fields that contain commas. Output only CSV
rows, no header and no commentary.
)";

std::string load(const std::string& dir, const std::string& name,
                 std::string_view embedded) {
    if (!dir.empty()) {
        std::filesystem::path path = std::filesystem::path(dir) / name;
        std::ifstream in(path, std::ios::binary);
        if (in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }
    }
    return std::string(embedded);
}

}  // namespace sqlev::prompts
