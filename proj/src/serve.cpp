#include <iostream>

#include "httplib.h"
#include "tag/service.hpp"

namespace tag {

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [key, value] : req.params) r.query.emplace(key, value);
    r.body = req.body;
    const Response out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(".*", forward);
  impl_->server.Post(".*", forward);
}

HttpServer::~HttpServer() = default;

bool HttpServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
int HttpServer::bind_any(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool HttpServer::run() { return impl_->server.listen_after_bind(); }
void HttpServer::stop() { impl_->server.stop(); }

bool serve(Service& service, const std::string& host, int port) {
  HttpServer server(service);
  if (!server.bind(host, port)) return false;
  std::cerr << "serving " << service.entries().size() << " document(s) on http://" << host << ":" << port << "\n";
  return server.run();
}

}  // namespace tag
