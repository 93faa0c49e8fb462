#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sqlev/dataset.hpp"
#include "sqlev/finding.hpp"
#include "sqlev/gateway.hpp"

namespace sqlev {

// Few-shot exemplars: the globally most similar training question plus up
// to four more from that question's database, ranked by descending score
// with ties broken by ascending question_id.
struct FewShotSet {
    QuestionRecord anchor;
    double anchor_score = 0.0;
    std::vector<std::pair<QuestionRecord, double>> companions;

    std::vector<QuestionRecord> ordered_records() const;  // anchor first
    nlohmann::ordered_json to_json() const;               // deterministic
};

// Persistent map (provider_id, question_id) -> vector. File format: one
// JSON record per line with fields provider_id, question_id, dim, values.
class EmbeddingCache {
public:
    EmbeddingCache() = default;
    static EmbeddingCache load(const std::string& path);  // missing file -> empty

    const EmbeddingVector* find(const std::string& provider_id,
                                const std::string& question_id) const;
    void put(const std::string& provider_id, const std::string& question_id,
             const EmbeddingVector& vector);
    void save(const std::string& path) const;  // stable key order
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::pair<std::string, std::string>, EmbeddingVector> entries_;
};

// Embeds every pool question not already cached. Failures leave the cache
// untouched for this batch and throw a GatewayError naming the failed ids.
void precompute_pool_embeddings(const TrainingPool& pool, LlmGateway& gateway,
                                EmbeddingCache& cache);

// Anchor = argmax cosine similarity over the whole pool; companions = top
// (few_shot_count - 1) among the anchor's database, excluding the anchor.
// Fewer available companions are returned in full with a finding.
FewShotSet select_few_shot(const std::string& question, const TrainingPool& pool,
                           LlmGateway& gateway, EmbeddingCache& cache,
                           int few_shot_count, Findings& findings);

}  // namespace sqlev
