#include <httplib.h>

#include "sqlev/errors.hpp"
#include "sqlev/gateway.hpp"

namespace sqlev {

namespace {

class HttpTransport : public Transport {
public:
    explicit HttpTransport(std::string base_url) : base_url_(std::move(base_url)) {
        if (base_url_.empty()) {
            throw ConfigError("gateway base_url is required for live provider access");
        }
        // Split "<scheme>://<host>[:port]/<prefix>" into origin + path prefix.
        size_t scheme = base_url_.find("://");
        size_t path_start =
            scheme == std::string::npos ? base_url_.find('/') : base_url_.find('/', scheme + 3);
        if (path_start == std::string::npos) {
            origin_ = base_url_;
        } else {
            origin_ = base_url_.substr(0, path_start);
            prefix_ = base_url_.substr(path_start);
            while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        }
    }

    Response post_json(const std::string& path, const std::string& body,
                       const std::string& bearer) override {
        httplib::Client client(origin_);
        client.set_connection_timeout(15, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
        auto result = client.Post(prefix_ + path, headers, body, "application/json");
        if (!result) {
            throw Error("transport failure: " + httplib::to_string(result.error()));
        }
        return Response{result->status, result->body};
    }

private:
    std::string base_url_;
    std::string origin_;
    std::string prefix_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url) {
    return std::make_unique<HttpTransport>(base_url);
}

}  // namespace sqlev
