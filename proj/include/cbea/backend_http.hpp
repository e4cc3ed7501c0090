#pragma once
// Default HTTP transport for the backend path. Kept in its own header so the
// rest of the library does not pull in cpp-httplib (and its socket code).

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "cbea/candidates.hpp"

namespace cbea {

// Endpoint form: "host:port/path" or "http://host:port/path". The API key,
// when present, rides in CBEA_BACKEND_API_KEY.
inline Transport make_http_transport() {
    return [](const BackendConfig& cfg, const std::string& body) -> TransportReply {
        TransportReply out;
        std::string endpoint = cfg.endpoint;
        const std::string scheme = "http://";
        if (endpoint.rfind(scheme, 0) == 0) endpoint = endpoint.substr(scheme.size());
        const auto slash = endpoint.find('/');
        const std::string host = slash == std::string::npos ? endpoint : endpoint.substr(0, slash);
        const std::string path = slash == std::string::npos ? "/" : endpoint.substr(slash);

        httplib::Client client(host);
        client.set_connection_timeout(cfg.timeout_seconds, 0);
        client.set_read_timeout(cfg.timeout_seconds, 0);

        httplib::Headers headers;
        if (const char* key = std::getenv("CBEA_BACKEND_API_KEY"))
            headers.emplace("Authorization", std::string("Bearer ") + key);

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            out.transport_error = true;
            out.error = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    };
}

inline Transport default_http_transport() { return make_http_transport(); }

inline AttemptOutcome generate_candidates_backend(const std::string& prompt,
                                                  const BackendConfig& cfg) {
    return generate_candidates_backend(prompt, cfg, default_http_transport());
}

}  // namespace cbea
