#include "flpadv/remote.hpp"

#include <httplib.h>

#include "flpadv/error.hpp"

namespace flpadv {

namespace http {

Url parse_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw ConfigError("endpoint is not a URL: " + std::string(url));
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw ConfigError("unsupported endpoint scheme: " + std::string(scheme));
    auto path_start = url.find('/', scheme_end + 3);
    Url out;
    if (path_start == std::string_view::npos) {
        out.origin = std::string(url);
        out.path = "/";
    } else {
        out.origin = std::string(url.substr(0, path_start));
        out.path = std::string(url.substr(path_start));
    }
    if (out.origin.size() == scheme_end + 3) throw ConfigError("endpoint has no host: " + std::string(url));
    return out;
}

nlohmann::json post_json(const std::string& url, const std::string& bearer_key,
                         const nlohmann::json& body, std::chrono::seconds timeout) {
    auto target = parse_url(url);
    httplib::Client client(target.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!bearer_key.empty()) headers.emplace("Authorization", "Bearer " + bearer_key);

    auto res = client.Post(target.path, headers, body.dump(), "application/json");
    if (!res) throw ProviderError("request to " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw ProviderError("request to " + url + " returned HTTP " + std::to_string(res->status));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError("unparsable response from " + url + ": " + e.what());
    }
}

}  // namespace http

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string endpoint, std::string key,
                                                 std::size_t dimension, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), key_(std::move(key)), timeout_(timeout), dimension_(dimension) {
    http::parse_url(endpoint_);
}

std::vector<double> RemoteEmbeddingProvider::embed(std::string_view text) {
    auto reply = http::post_json(endpoint_, key_, {{"text", std::string(text)}}, timeout_);
    std::vector<double> v;
    try {
        v = reply.at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("embedding response lacks a numeric 'embedding' array: ") + e.what());
    }
    std::lock_guard lock(mutex_);
    if (dimension_ == 0) dimension_ = v.size();
    return v;
}

std::size_t RemoteEmbeddingProvider::dimension() const {
    {
        std::lock_guard lock(mutex_);
        if (dimension_ != 0) return dimension_;
    }
    const_cast<RemoteEmbeddingProvider*>(this)->embed("dimension probe");
    std::lock_guard lock(mutex_);
    return dimension_;
}

RemoteLlmProvider::RemoteLlmProvider(std::string endpoint, std::string key, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), key_(std::move(key)), timeout_(timeout) {
    http::parse_url(endpoint_);
}

std::string RemoteLlmProvider::complete(const std::string& prompt) {
    auto reply = http::post_json(endpoint_, key_, {{"prompt", prompt}}, timeout_);
    try {
        return reply.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("completion response lacks a string 'text': ") + e.what());
    }
}

}  // namespace flpadv
