#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ctindex/service/api.hpp"

namespace ctindex::service {

/// HTTP/1.1 binding of ApiRouter. Handlers run on the server's thread
/// pool and reach the service only through the router.
class HttpServer {
public:
    HttpServer(const ApiRouter& router, std::size_t max_body_bytes);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port.
    /// Errors: io_error.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void serve();
    void stop();
    [[nodiscard]] bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ctindex::service
