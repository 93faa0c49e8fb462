#pragma once

#include <string>
#include <string_view>

namespace sqlev::prompts {

// Instruction assets. The compiled-in text is the versioned default; a
// prompt directory can override any of them by file name (see load()).
extern const std::string_view kEvidenceFullSchema;   // evidence_full_schema.txt
extern const std::string_view kEvidenceSummarized;   // evidence_summarized.txt
extern const std::string_view kSchemaSummarize;      // schema_summarize.txt
extern const std::string_view kKeywordExtract;       // keyword_extract.txt
extern const std::string_view kDescribeTable;        // describe_table.txt

// Returns the override from `<dir>/<name>` when dir is non-empty and the
// file exists, otherwise the embedded default.
std::string load(const std::string& dir, const std::string& name,
                 std::string_view embedded);

}  // namespace sqlev::prompts
