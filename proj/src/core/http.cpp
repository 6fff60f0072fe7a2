#include "repograph/core/http.hpp"

#include <httplib.h>

#include "repograph/core/errors.hpp"

namespace repograph {

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpTransport make_http_transport(std::chrono::milliseconds timeout) {
    return [timeout](const HttpRequest& req) {
        const auto [base, path] = split_url(req.url);
        httplib::Client client(base);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        httplib::Headers headers;
        for (const auto& [k, v] : req.headers) headers.emplace(k, v);
        auto res = client.Post(path, headers, req.body, "application/json");
        if (!res) {
            throw TransportError("POST " + req.url + " failed: " + httplib::to_string(res.error()));
        }
        return HttpResponse{res->status, res->body};
    };
}

}  // namespace repograph
