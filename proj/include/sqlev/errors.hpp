#pragma once

#include <stdexcept>
#include <string>

namespace sqlev {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration or flag combinations. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable or malformed input files (databases, datasets, caches).
class DataError : public Error {
public:
    using Error::Error;
};

// Invalid arguments to a numeric or vector operation (dimension mismatch,
// zero vector, non-positive timing).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Provider or transport failure after the retry budget. Carries the
// pipeline stage that issued the request.
class GatewayError : public Error {
public:
    GatewayError(const std::string& stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Cassette miss while in replay mode. Replay never falls through to the
// network, so a miss is always a hard failure.
class ReplayMiss : public Error {
public:
    explicit ReplayMiss(const std::string& fingerprint)
        : Error("cassette replay miss for fingerprint " + fingerprint),
          fingerprint_(fingerprint) {}
    const std::string& fingerprint() const { return fingerprint_; }

private:
    std::string fingerprint_;
};

// Statement rejected by the read-only validator.
class SqlSafetyError : public Error {
public:
    using Error::Error;
};

// Prompt still over budget after all permitted truncation steps.
class PromptOversize : public Error {
public:
    using Error::Error;
};

}  // namespace sqlev
