#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqlev/finding.hpp"

namespace sqlev {

enum class Split { train, dev, test };
const char* split_name(Split s);
Split split_from_name(const std::string& name);  // throws ConfigError

struct QuestionRecord {
    std::string question_id;
    std::string db_id;
    std::string question;
    std::optional<std::string> gold_sql;
    std::optional<std::string> gold_evidence;  // absent when missing OR empty in the file
    Split split = Split::dev;
};

// Loads a BIRD-style (question_id/db_id/question/evidence/SQL) or
// Spider-style (db_id/question/query) JSON array. Records preserve file
// order; question_ids missing from the file become "<split>:<index>".
std::vector<QuestionRecord> load_split(const std::string& path, Split split);

// BIRD-style JSON array; load(serialize(records)) round-trips identically.
std::string serialize_split(const std::vector<QuestionRecord>& records);

// Training records that carry gold evidence, for few-shot retrieval.
class TrainingPool {
public:
    // Records without gold_evidence or not in the train split are excluded
    // with a finding. Throws DataError when nothing remains.
    static TrainingPool build(const std::vector<QuestionRecord>& records,
                              Findings& findings);

    // Stable ascending question_id order (lexicographic).
    const std::vector<QuestionRecord>& records() const { return records_; }
    std::vector<const QuestionRecord*> by_db(const std::string& db_id) const;
    size_t size() const { return records_.size(); }

private:
    std::vector<QuestionRecord> records_;
    std::map<std::string, std::vector<size_t>> by_db_;
};

}  // namespace sqlev
