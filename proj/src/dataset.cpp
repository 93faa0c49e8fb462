#include "sqlev/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sqlev/errors.hpp"
#include "sqlev/text.hpp"

namespace sqlev {

using ordered_json = nlohmann::ordered_json;

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "dev";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "dev") return Split::dev;
    if (name == "test") return Split::test;
    throw ConfigError("unknown split: " + name);
}

namespace {

std::string id_to_string(const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw DataError("question_id must be a string or integer");
}

}  // namespace

std::vector<QuestionRecord> load_split(const std::string& path, Split split) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read question file: " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) throw DataError(path + ": expected a JSON array of questions");

    std::vector<QuestionRecord> records;
    std::set<std::string> seen_ids;
    for (size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc[i];
        auto fail = [&](const std::string& why) {
            throw DataError(path + ": entry " + std::to_string(i) + ": " + why);
        };
        if (!entry.is_object()) fail("not an object");

        QuestionRecord record;
        record.split = split;
        try {
            if (entry.contains("question_id")) {
                record.question_id = id_to_string(entry.at("question_id"));
            } else {
                record.question_id = std::string(split_name(split)) + ":" + std::to_string(i);
            }
            if (!entry.contains("db_id") || !entry.at("db_id").is_string()) {
                fail("missing db_id");
            }
            record.db_id = entry.at("db_id").get<std::string>();
            if (!entry.contains("question") || !entry.at("question").is_string()) {
                fail("missing question");
            }
            record.question = entry.at("question").get<std::string>();
            if (trim(record.question).empty()) fail("question is empty");

            // BIRD uses "SQL", Spider uses "query".
            if (entry.contains("SQL") && entry.at("SQL").is_string()) {
                record.gold_sql = entry.at("SQL").get<std::string>();
            } else if (entry.contains("query") && entry.at("query").is_string()) {
                record.gold_sql = entry.at("query").get<std::string>();
            }
            // Empty evidence counts as absent (the missing-evidence category).
            if (entry.contains("evidence") && entry.at("evidence").is_string()) {
                std::string evidence = entry.at("evidence").get<std::string>();
                if (!trim(evidence).empty()) record.gold_evidence = std::move(evidence);
            }
        } catch (const nlohmann::json::exception& e) {
            fail(e.what());
        }

        if (!seen_ids.insert(record.question_id).second) {
            fail("duplicate question_id '" + record.question_id + "'");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::string serialize_split(const std::vector<QuestionRecord>& records) {
    ordered_json doc = ordered_json::array();
    for (const auto& r : records) {
        ordered_json entry;
        entry["question_id"] = r.question_id;
        entry["db_id"] = r.db_id;
        entry["question"] = r.question;
        if (r.gold_evidence) entry["evidence"] = *r.gold_evidence;
        if (r.gold_sql) entry["SQL"] = *r.gold_sql;
        doc.push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

TrainingPool TrainingPool::build(const std::vector<QuestionRecord>& records,
                                 Findings& findings) {
    TrainingPool pool;
    for (const auto& r : records) {
        if (r.split != Split::train) {
            add_finding(findings, Finding::Severity::warning, "pool_not_train",
                        r.question_id + " is not in the train split; excluded");
            continue;
        }
        if (!r.gold_evidence) {
            add_finding(findings, Finding::Severity::warning, "pool_missing_evidence",
                        r.question_id + " has no gold evidence; excluded from few-shot pool");
            continue;
        }
        pool.records_.push_back(r);
    }
    if (pool.records_.empty()) {
        throw DataError("few-shot pool is empty: no train records with gold evidence");
    }
    std::sort(pool.records_.begin(), pool.records_.end(),
              [](const QuestionRecord& a, const QuestionRecord& b) {
                  return a.question_id < b.question_id;
              });
    for (size_t i = 0; i < pool.records_.size(); ++i) {
        pool.by_db_[pool.records_[i].db_id].push_back(i);
    }
    return pool;
}

std::vector<const QuestionRecord*> TrainingPool::by_db(const std::string& db_id) const {
    std::vector<const QuestionRecord*> out;
    auto it = by_db_.find(db_id);
    if (it == by_db_.end()) return out;
    out.reserve(it->second.size());
    for (size_t i : it->second) out.push_back(&records_[i]);
    return out;
}

}  // namespace sqlev
