#include "sqlev/gateway.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "sqlev/text.hpp"

namespace sqlev {

using json = nlohmann::json;

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim != b.dim || a.values.size() != b.values.size()) {
        throw InvalidArgument("cosine_similarity: dimension mismatch (" +
                              std::to_string(a.dim) + " vs " + std::to_string(b.dim) + ")");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine_similarity: zero vector");
    double cos = dot / (std::sqrt(na) * std::sqrt(nb));
    if (!std::isfinite(cos)) throw InvalidArgument("cosine_similarity: non-finite result");
    return std::min(1.0, std::max(-1.0, cos));
}

std::size_t estimate_tokens(std::string_view text) {
    return (text.size() + 3) / 4;
}

EmbeddingVector fallback_embed(const std::string& text) {
    EmbeddingVector v;
    v.provider_id = kFallbackProviderId;
    v.dim = kFallbackDim;
    v.values.assign(kFallbackDim, 0.0);
    std::string lowered = to_lower(text);
    for (int n = 1; n <= 4; ++n) {
        if (static_cast<size_t>(n) > lowered.size()) break;
        for (size_t i = 0; i + n <= lowered.size(); ++i) {
            std::uint64_t h = fnv1a64(std::string_view(lowered).substr(i, n));
            v.values[h % kFallbackDim] += 1.0;
        }
    }
    return v;
}

CassetteMode cassette_mode_from_name(const std::string& name) {
    if (name == "record") return CassetteMode::record;
    if (name == "replay") return CassetteMode::replay;
    if (name == "passthrough") return CassetteMode::passthrough;
    throw ConfigError("unknown cassette mode: " + name);
}

Cassette Cassette::load(const std::string& path) {
    Cassette cassette;
    cassette.path_ = path;
    std::ifstream in(path, std::ios::binary);
    if (!in) return cassette;  // a fresh cassette in record mode
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError("cassette " + path + " line " + std::to_string(lineno) +
                            ": missing tab separator");
        }
        std::string fingerprint = line.substr(0, tab);
        std::string response = base64_decode(line.substr(tab + 1));
        cassette.entries_.emplace(std::move(fingerprint), std::move(response));
    }
    return cassette;
}

std::optional<std::string> Cassette::lookup(const std::string& fingerprint) const {
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void Cassette::store(const std::string& fingerprint, const std::string& response) {
    auto [it, inserted] = entries_.emplace(fingerprint, response);
    if (!inserted) return;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot append to cassette: " + path_);
    out << fingerprint << '\t' << base64_encode(response) << '\n';
}

namespace {

// Canonical payloads: sorted keys, byte-exact content. nlohmann::json
// orders object keys lexicographically, which gives a stable serialization
// across runs and platforms.
std::string canonical_chat_payload(const ChatRequest& request) {
    json doc;
    doc["kind"] = "chat";
    doc["model"] = request.model_id;
    doc["temperature"] = request.temperature;
    doc["max_output_tokens"] = request.max_output_tokens;
    json msgs = json::array();
    for (const auto& m : request.messages) {
        msgs.push_back({{"content", m.content}, {"role", m.role}});
    }
    doc["messages"] = msgs;
    return doc.dump();
}

std::string canonical_embed_payload(const std::string& model_id, const std::string& text) {
    json doc;
    doc["kind"] = "embed";
    doc["model"] = model_id;
    doc["text"] = text;
    return doc.dump();
}

}  // namespace

std::string LlmGateway::fingerprint_chat(const ChatRequest& request) {
    return "chat:" + fnv1a64_hex(canonical_chat_payload(request));
}

std::string LlmGateway::fingerprint_embed(const std::string& model_id,
                                          const std::string& text) {
    return "embed:" + fnv1a64_hex(canonical_embed_payload(model_id, text));
}

// Bounded in-flight HTTP requests.
class InFlightLimiter {
public:
    explicit InFlightLimiter(int limit) : available_(limit > 0 ? limit : 1) {}
    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

namespace {

struct InFlightGuard {
    InFlightLimiter& limiter;
    explicit InFlightGuard(InFlightLimiter& l) : limiter(l) { limiter.acquire(); }
    ~InFlightGuard() { limiter.release(); }
};

}  // namespace

LlmGateway::LlmGateway(GatewayOptions options, std::unique_ptr<Transport> transport)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      limiter_(std::make_unique<InFlightLimiter>(options_.max_in_flight)) {
    if (!options_.cassette_path.empty() &&
        options_.cassette_mode != CassetteMode::passthrough) {
        cassette_ = Cassette::load(options_.cassette_path);
    } else if (options_.cassette_mode == CassetteMode::replay) {
        throw ConfigError("replay mode requires a cassette path");
    }
}

std::string LlmGateway::embedding_provider_id() const {
    if (options_.embed_provider == "fallback") return kFallbackProviderId;
    return "http:" + options_.embed_model;
}

Transport::Response LlmGateway::post_with_retries(const std::string& path,
                                                  const std::string& body,
                                                  const std::string& stage) {
    if (!transport_) transport_ = make_http_transport(options_.base_url);
    std::string bearer;
    if (const char* key = std::getenv(options_.api_key_env.c_str())) bearer = key;

    std::string last_error;
    int backoff = options_.backoff_ms;
    for (int attempt = 1; attempt <= std::max(1, options_.retries); ++attempt) {
        try {
            InFlightGuard guard(*limiter_);
            Transport::Response response = transport_->post_json(path, body, bearer);
            if (response.status >= 200 && response.status < 300) return response;
            if (response.status < 500) {
                // 4xx-class failures are not retryable.
                throw GatewayError(stage, "provider returned status " +
                                              std::to_string(response.status) + ": " +
                                              response.body.substr(0, 200));
            }
            last_error = "provider returned status " + std::to_string(response.status);
        } catch (const GatewayError&) {
            throw;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
        if (attempt < options_.retries) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
    }
    throw GatewayError(stage, "request failed after " + std::to_string(options_.retries) +
                                  " attempts: " + last_error);
}

std::string LlmGateway::http_chat(const ChatRequest& request, const std::string& stage) {
    json body;
    body["model"] = request.model_id;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    body["messages"] = json::array();
    for (const auto& m : request.messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    Transport::Response response = post_with_retries("/chat/completions", body.dump(), stage);
    try {
        json doc = json::parse(response.body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw GatewayError(stage, std::string("malformed chat response: ") + e.what());
    }
}

std::string LlmGateway::http_embed_one(const std::string& text) {
    json body;
    body["model"] = options_.embed_model;
    body["input"] = json::array({text});
    Transport::Response response = post_with_retries("/embeddings", body.dump(), "embed");
    try {
        json doc = json::parse(response.body);
        return doc.at("data").at(0).at("embedding").dump();
    } catch (const json::exception& e) {
        throw GatewayError("embed", std::string("malformed embedding response: ") + e.what());
    }
}

std::string LlmGateway::chat(const ChatRequest& request, const std::string& stage) {
    if (request.messages.empty()) throw InvalidArgument("chat: empty message list");
    for (const auto& m : request.messages) {
        if (m.role != "system" && m.role != "user" && m.role != "assistant") {
            throw InvalidArgument("chat: unknown role " + m.role);
        }
    }

    std::string fingerprint = fingerprint_chat(request);
    if (options_.cassette_mode != CassetteMode::passthrough) {
        std::lock_guard lock(cassette_mutex_);
        if (auto hit = cassette_.lookup(fingerprint)) return *hit;
        if (options_.cassette_mode == CassetteMode::replay) throw ReplayMiss(fingerprint);
    }

    std::string response = http_chat(request, stage);

    if (options_.cassette_mode == CassetteMode::record) {
        std::lock_guard lock(cassette_mutex_);
        cassette_.store(fingerprint, response);
    }
    return response;
}

std::vector<EmbeddingVector> LlmGateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw InvalidArgument("embed: empty input");

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());

    if (options_.embed_provider == "fallback") {
        for (const auto& text : texts) out.push_back(fallback_embed(text));
        return out;
    }

    for (const auto& text : texts) {
        std::string fingerprint = fingerprint_embed(options_.embed_model, text);
        std::string payload;
        bool have = false;
        if (options_.cassette_mode != CassetteMode::passthrough) {
            std::lock_guard lock(cassette_mutex_);
            if (auto hit = cassette_.lookup(fingerprint)) {
                payload = *hit;
                have = true;
            } else if (options_.cassette_mode == CassetteMode::replay) {
                throw ReplayMiss(fingerprint);
            }
        }
        if (!have) {
            payload = http_embed_one(text);
            if (options_.cassette_mode == CassetteMode::record) {
                std::lock_guard lock(cassette_mutex_);
                cassette_.store(fingerprint, payload);
            }
        }

        EmbeddingVector v;
        v.provider_id = embedding_provider_id();
        try {
            v.values = json::parse(payload).get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw GatewayError("embed", std::string("malformed embedding payload: ") + e.what());
        }
        v.dim = static_cast<int>(v.values.size());
        for (double x : v.values) {
            if (!std::isfinite(x)) throw GatewayError("embed", "non-finite embedding value");
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace sqlev
