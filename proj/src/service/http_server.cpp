#include "ctindex/service/http_server.hpp"

#include <algorithm>
#include <cctype>
#include <httplib.h>

namespace ctindex::service {

struct HttpServer::Impl {
    const ApiRouter& router;
    httplib::Server server;

    explicit Impl(const ApiRouter& r) : router(r) {}

    void dispatch(const httplib::Request& req, httplib::Response& res) const {
        ApiRequest request;
        request.method = req.method;
        request.path = req.path;
        request.body = req.body;
        for (const auto& [key, value] : req.params) {
            request.query.emplace(key, value);
        }
        for (const auto& [key, value] : req.headers) {
            std::string lower = key;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            request.headers.emplace(std::move(lower), value);
        }
        auto response = router.handle(request);
        res.status = response.status;
        res.set_content(response.body, response.content_type);
    }
};

HttpServer::HttpServer(const ApiRouter& router, std::size_t max_body_bytes) : impl_(std::make_unique<Impl>(router)) {
    // One byte over the limit still reaches the router, which answers 413.
    impl_->server.set_payload_max_length(max_body_bytes + 1);
    auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->dispatch(req, res); };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    impl_->server.Put(".*", handler);
    impl_->server.Delete(".*", handler);
    impl_->server.Patch(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = -1;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (impl_->server.bind_to_port(host, port)) {
        bound = port;
    }
    if (bound < 0) {
        throw Error(Errc::io_error, "cannot listen on " + host + ":" + std::to_string(port));
    }
    return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) {
        impl_->server.stop();
    }
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace ctindex::service
