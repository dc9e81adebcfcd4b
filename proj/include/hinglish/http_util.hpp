#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include <httplib.h>

#include "hinglish/error.hpp"

namespace hinglish::http {

/// "http://host:port/path" split into the client origin and request path.
struct Url {
    std::string origin;
    std::string path;
};

inline Url parse_url(std::string_view url) {
    auto scheme = url.find("://");
    if (scheme == std::string_view::npos) throw ValidationError("URL needs a scheme: '" + std::string(url) + "'");
    if (url.substr(0, scheme) != "http") {
        throw ValidationError("only http:// endpoints are supported: '" + std::string(url) + "'");
    }
    auto slash = url.find('/', scheme + 3);
    if (slash == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

inline std::unique_ptr<httplib::Client> make_client(const Url& url, std::chrono::milliseconds timeout) {
    auto client = std::make_unique<httplib::Client>(url.origin);
    if (!client->is_valid()) throw ValidationError("invalid endpoint origin '" + url.origin + "'");
    auto secs = timeout.count() / 1000;
    auto usecs = (timeout.count() % 1000) * 1000;
    client->set_connection_timeout(secs, usecs);
    client->set_read_timeout(secs, usecs);
    client->set_write_timeout(secs, usecs);
    return client;
}

}  // namespace hinglish::http
