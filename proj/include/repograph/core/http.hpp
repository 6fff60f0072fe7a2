#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>

namespace repograph {

struct HttpRequest {
    std::string url;  // http://host[:port]/path
    std::string body;
    std::map<std::string, std::string> headers;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// POSTs a JSON body. Implementations throw TransportError when no response arrives.
using HttpTransport = std::function<HttpResponse(const HttpRequest&)>;

HttpTransport make_http_transport(std::chrono::milliseconds timeout = std::chrono::seconds(60));

}  // namespace repograph
