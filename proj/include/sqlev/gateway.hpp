#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sqlev/errors.hpp"

namespace sqlev {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 1024;
};

struct EmbeddingVector {
    std::vector<double> values;
    std::string provider_id;
    int dim = 0;
};

/// dot(a,b) / (|a|·|b|), clamped to [-1, 1]. Throws InvalidArgument on
/// dimension mismatch or zero vectors.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Conservative byte-length/4 token estimate, used wherever a provider
/// tokenizer is unavailable.
std::size_t estimate_tokens(std::string_view text);

/// Deterministic offline embedder: hashed character n-gram (n = 1..4)
/// frequency vector of fixed dimension 512.
EmbeddingVector fallback_embed(const std::string& text);
inline constexpr const char* kFallbackProviderId = "fallback-ngram-v1";
inline constexpr int kFallbackDim = 512;

enum class CassetteMode { record, replay, passthrough };
CassetteMode cassette_mode_from_name(const std::string& name);  // throws ConfigError

// Recorded map from request fingerprints to provider responses. File format:
// append-only lines of `fingerprint<TAB>base64(response)` for bit-exact
// replay.
class Cassette {
public:
    Cassette() = default;
    static Cassette load(const std::string& path);  // missing file -> empty cassette

    std::optional<std::string> lookup(const std::string& fingerprint) const;
    // Inserts and appends to the backing file; duplicate fingerprints keep
    // the first entry.
    void store(const std::string& fingerprint, const std::string& response);

    void set_path(const std::string& path) { path_ = path; }
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, std::string> entries_;
    std::string path_;
};

// Minimal HTTP POST abstraction so tests can inject scripted or failing
// transports.
class Transport {
public:
    virtual ~Transport() = default;
    struct Response {
        int status = 0;
        std::string body;
    };
    // Throws Error on transport-level failure.
    virtual Response post_json(const std::string& path, const std::string& body,
                               const std::string& bearer) = 0;
};

std::unique_ptr<Transport> make_http_transport(const std::string& base_url);

struct GatewayOptions {
    std::string base_url;                     // chat-completions compatible endpoint
    std::string api_key_env = "SQLEV_API_KEY";
    std::string embed_provider = "fallback";  // "fallback" | "http"
    std::string embed_model = "all-mpnet-base-v2";
    CassetteMode cassette_mode = CassetteMode::passthrough;
    std::string cassette_path;
    int retries = 3;
    int backoff_ms = 100;
    int max_in_flight = 4;
};

// Provider-agnostic chat + embedding access with deterministic
// record/replay. Safe for concurrent callers; cassette writes are
// serialized; HTTP requests are bounded by max_in_flight.
class LlmGateway {
public:
    explicit LlmGateway(GatewayOptions options,
                        std::unique_ptr<Transport> transport = nullptr);

    // Returns the assistant text. `stage` names the pipeline stage for error
    // reporting and is not part of the fingerprint.
    std::string chat(const ChatRequest& request, const std::string& stage);

    // One vector per input, order preserved; never returns a partial batch.
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

    static std::string fingerprint_chat(const ChatRequest& request);
    static std::string fingerprint_embed(const std::string& model_id,
                                         const std::string& text);

    const GatewayOptions& options() const { return options_; }
    const Cassette& cassette() const { return cassette_; }
    std::string embedding_provider_id() const;

private:
    std::string http_chat(const ChatRequest& request, const std::string& stage);
    std::string http_embed_one(const std::string& text);
    Transport::Response post_with_retries(const std::string& path, const std::string& body,
                                          const std::string& stage);

    GatewayOptions options_;
    std::unique_ptr<Transport> transport_;
    Cassette cassette_;
    std::mutex cassette_mutex_;
    std::unique_ptr<class InFlightLimiter> limiter_;
};

}  // namespace sqlev
