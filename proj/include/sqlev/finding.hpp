#pragma once

#include <string>
#include <vector>

namespace sqlev {

// Non-fatal diagnostics collected by operations that must not abort
// (description ingestion, profiling, prompt assembly, ...).
struct Finding {
    enum class Severity { info, warning, error };
    Severity severity = Severity::warning;
    std::string code;    // stable machine-readable tag, e.g. "csv_unknown_column"
    std::string detail;  // human-readable context
};

using Findings = std::vector<Finding>;

inline void add_finding(Findings& findings, Finding::Severity severity,
                        std::string code, std::string detail) {
    findings.push_back(Finding{severity, std::move(code), std::move(detail)});
}

inline const char* severity_name(Finding::Severity s) {
    switch (s) {
        case Finding::Severity::info: return "info";
        case Finding::Severity::warning: return "warning";
        case Finding::Severity::error: return "error";
    }
    return "unknown";
}

}  // namespace sqlev
