#include "sqlev/retriever.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sqlev/errors.hpp"
#include "sqlev/text.hpp"

namespace sqlev {

using ordered_json = nlohmann::ordered_json;

std::vector<QuestionRecord> FewShotSet::ordered_records() const {
    std::vector<QuestionRecord> out;
    out.reserve(1 + companions.size());
    out.push_back(anchor);
    for (const auto& [record, score] : companions) out.push_back(record);
    return out;
}

ordered_json FewShotSet::to_json() const {
    ordered_json doc;
    doc["anchor"] = {{"question_id", anchor.question_id},
                     {"db_id", anchor.db_id},
                     {"score", anchor_score}};
    doc["companions"] = ordered_json::array();
    for (const auto& [record, score] : companions) {
        doc["companions"].push_back(
            {{"question_id", record.question_id}, {"db_id", record.db_id}, {"score", score}});
    }
    return doc;
}

EmbeddingCache EmbeddingCache::load(const std::string& path) {
    EmbeddingCache cache;
    std::ifstream in(path, std::ios::binary);
    if (!in) return cache;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto doc = nlohmann::json::parse(line);
            EmbeddingVector v;
            v.provider_id = doc.at("provider_id").get<std::string>();
            v.values = doc.at("values").get<std::vector<double>>();
            v.dim = doc.at("dim").get<int>();
            if (v.dim != static_cast<int>(v.values.size())) {
                throw DataError("dim does not match values length");
            }
            cache.entries_[{v.provider_id, doc.at("question_id").get<std::string>()}] =
                std::move(v);
        } catch (const std::exception& e) {
            throw DataError("embedding cache " + path + " line " + std::to_string(lineno) +
                            ": " + e.what());
        }
    }
    return cache;
}

const EmbeddingVector* EmbeddingCache::find(const std::string& provider_id,
                                            const std::string& question_id) const {
    auto it = entries_.find({provider_id, question_id});
    return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingCache::put(const std::string& provider_id, const std::string& question_id,
                         const EmbeddingVector& vector) {
    entries_[{provider_id, question_id}] = vector;
}

void EmbeddingCache::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write embedding cache: " + path);
    for (const auto& [key, vector] : entries_) {
        ordered_json doc;
        doc["provider_id"] = key.first;
        doc["question_id"] = key.second;
        doc["dim"] = vector.dim;
        doc["values"] = vector.values;
        out << doc.dump() << "\n";
    }
}

void precompute_pool_embeddings(const TrainingPool& pool, LlmGateway& gateway,
                                EmbeddingCache& cache) {
    if (pool.size() == 0) throw DataError("cannot embed an empty pool");
    std::string provider = gateway.embedding_provider_id();

    std::vector<const QuestionRecord*> missing;
    for (const auto& record : pool.records()) {
        if (!cache.find(provider, record.question_id)) missing.push_back(&record);
    }
    if (missing.empty()) return;

    std::vector<std::string> texts;
    texts.reserve(missing.size());
    for (const auto* record : missing) texts.push_back(record->question);

    std::vector<EmbeddingVector> vectors;
    try {
        vectors = gateway.embed(texts);
    } catch (const Error& e) {
        std::ostringstream ids;
        for (size_t i = 0; i < missing.size(); ++i) {
            if (i) ids << ", ";
            ids << missing[i]->question_id;
        }
        throw GatewayError("embed", "pool embedding failed for [" + ids.str() +
                                        "]: " + e.what());
    }
    // All-or-nothing: the cache never holds a partial batch.
    for (size_t i = 0; i < missing.size(); ++i) {
        cache.put(provider, missing[i]->question_id, vectors[i]);
    }
}

FewShotSet select_few_shot(const std::string& question, const TrainingPool& pool,
                           LlmGateway& gateway, EmbeddingCache& cache,
                           int few_shot_count, Findings& findings) {
    if (pool.size() == 0) throw DataError("few-shot selection over an empty pool");
    if (few_shot_count < 1) throw InvalidArgument("few_shot_count must be at least 1");

    precompute_pool_embeddings(pool, gateway, cache);
    std::string provider = gateway.embedding_provider_id();
    EmbeddingVector query = gateway.embed({question})[0];

    // Anchor: global argmax; ties by ascending question_id (pool order is
    // already ascending, so strict > keeps the first).
    const QuestionRecord* anchor = nullptr;
    double anchor_score = -2.0;
    for (const auto& record : pool.records()) {
        const EmbeddingVector* v = cache.find(provider, record.question_id);
        if (!v) throw DataError("missing pool embedding for " + record.question_id);
        double score = cosine_similarity(query, *v);
        if (score > anchor_score) {
            anchor_score = score;
            anchor = &record;
        }
    }

    FewShotSet out;
    out.anchor = *anchor;
    out.anchor_score = anchor_score;

    std::vector<std::pair<QuestionRecord, double>> same_db;
    for (const QuestionRecord* record : pool.by_db(anchor->db_id)) {
        if (record->question_id == anchor->question_id) continue;  // never a companion
        const EmbeddingVector* v = cache.find(provider, record->question_id);
        same_db.emplace_back(*record, cosine_similarity(query, *v));
    }
    std::stable_sort(same_db.begin(), same_db.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first.question_id < b.first.question_id;
    });

    size_t wanted = static_cast<size_t>(few_shot_count - 1);
    if (same_db.size() < wanted) {
        add_finding(findings, Finding::Severity::info, "few_shot_short",
                    "only " + std::to_string(same_db.size()) + " companion(s) available in " +
                        anchor->db_id + " (wanted " + std::to_string(wanted) + ")");
    }
    for (size_t i = 0; i < std::min(wanted, same_db.size()); ++i) {
        out.companions.push_back(same_db[i]);
    }
    return out;
}

}  // namespace sqlev
