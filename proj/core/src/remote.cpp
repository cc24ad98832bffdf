#include "rms/remote.hpp"

#include <httplib.h>

#include <cstdlib>

namespace rms {

RemoteConfig remote_config_from_env(std::optional<std::string> base_url) {
  RemoteConfig c;
  if (base_url && !base_url->empty()) {
    c.base_url = *base_url;
  } else if (const char* env = std::getenv("RMS_BACKEND_URL"); env != nullptr && *env != '\0') {
    c.base_url = env;
  } else {
    throw ConfigError("endpoint: no --endpoint given and RMS_BACKEND_URL is unset");
  }
  if (c.base_url.rfind("http://", 0) != 0) {
    throw ConfigError("endpoint: '" + c.base_url + "' must start with http://");
  }
  if (const char* tok = std::getenv("RMS_BACKEND_TOKEN")) c.token = tok;
  return c;
}

// ---------------------------------------------------------------------------
// Client

RemoteClient::RemoteClient(RemoteConfig config)
    : config_(std::move(config)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_in_flight, 1, 1024))) {
  if (config_.max_retries < 0) throw ConfigError("max_retries: must be non-negative");
}

json RemoteClient::post(std::string_view path, const json& body) const {
  const std::string payload = dump_canonical(body);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  int last_status = 0;
  std::string last_error;
  const int attempts = config_.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      ++retries_;
      std::this_thread::sleep_for(config_.backoff * (1 << std::min(attempt - 2, 10)));
    }
    httplib::Result res;
    {
      slots_.acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{slots_};
      ++requests_;
      httplib::Client cli(config_.base_url);
      cli.set_connection_timeout(config_.timeout);
      cli.set_read_timeout(config_.timeout);
      cli.set_write_timeout(config_.timeout);
      res = cli.Post(std::string(path), headers, payload, "application/json");
    }
    if (!res) {
      last_status = 0;
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    if (res->status == 503) {
      last_error = "backend overloaded (503)";
      continue;
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw BackendError("malformed response from " + std::string(path) + ": " + e.what(),
                         res->status, attempt, false);
    }
    if (res->status == 200) return reply;
    const std::string error = reply.is_object() ? reply.value("error", res->body) : res->body;
    const std::string field = reply.is_object() ? reply.value("field", "") : "";
    throw BackendError(std::string(path) + " returned " + std::to_string(res->status) + ": " +
                           error,
                       res->status, attempt, false, field);
  }
  throw BackendError(std::string(path) + ": giving up after " + std::to_string(attempts) +
                         " attempts (" + last_error + ")",
                     last_status, attempts, true);
}

namespace {

template <class T>
T decode_reply(const json& reply, std::string_view path) {
  try {
    return decode<T>(reply);
  } catch (const ParseError& e) {
    throw BackendError("malformed response from " + std::string(path) + ": " + e.what(), 200, 1,
                       false, e.field());
  }
}

}  // namespace

DsVerdict RemoteDsBackend::ds_evaluate(const DsInput& input) const {
  return decode_reply<DsVerdict>(client_->post(kDsPath, encode(input)), kDsPath);
}

GpVerdict RemoteGpBackend::gp_evaluate(const GpInput& input) const {
  auto v = decode_reply<GpVerdict>(client_->post(kGpPath, encode(input)), kGpPath);
  if (auto bad = validate(v, input); !bad.empty()) {
    throw BackendError("invalid verdict from " + std::string(kGpPath) + ": " + bad.front(), 200,
                       1, false, "s_gp.preference");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Server

struct MockRmServer::Impl {
  httplib::Server server;
};

MockRmServer::MockRmServer(const DsBackend& ds, const GpBackend& gp, MockServerConfig config)
    : ds_(ds), gp_(gp), config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  auto reply = [](httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(dump_canonical(body), "application/json");
  };

  auto handle = [this, reply](const httplib::Request& req, httplib::Response& res, auto&& eval) {
    const std::size_t n = requests_++;
    if (!config_.token.empty() &&
        req.get_header_value("Authorization") != "Bearer " + config_.token) {
      reply(res, 401, {{"error", "missing or invalid bearer token"}, {"field", "Authorization"}});
    } else if (n < config_.fail_first) {
      reply(res, 503, {{"error", "backend overloaded"}, {"field", ""}});
    } else {
      try {
        const json body = json::parse(req.body);
        reply(res, 200, eval(body));
      } catch (const json::parse_error& e) {
        reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}, {"field", "body"}});
      } catch (const ParseError& e) {
        reply(res, 400, {{"error", e.detail()}, {"field", e.field()}});
      } catch (const DataError& e) {
        reply(res, 422, {{"error", e.what()}, {"field", "context"}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}, {"field", ""}});
      }
    }
    if (config_.log != nullptr) {
      std::lock_guard lock(log_mu_);
      *config_.log << "#" << n + 1 << " " << req.method << " " << req.path << " " << res.status
                   << " " << res.body.size() << "B" << std::endl;
    }
  };

  impl_->server.Post(std::string(kDsPath), [this, handle](const httplib::Request& req,
                                                         httplib::Response& res) {
    handle(req, res, [this](const json& body) {
      return encode(ds_.ds_evaluate(decode<DsInput>(body, config_.decode)));
    });
  });
  impl_->server.Post(std::string(kGpPath), [this, handle](const httplib::Request& req,
                                                         httplib::Response& res) {
    handle(req, res, [this](const json& body) {
      const auto input = decode<GpInput>(body, config_.decode);
      return encode(gp_.gp_evaluate(input));
    });
  });
}

MockRmServer::~MockRmServer() { stop(); }

int MockRmServer::bind() {
  if (config_.port == 0) {
    port_ = impl_->server.bind_to_any_port(config_.host);
  } else {
    port_ = impl_->server.bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) {
    throw ConfigError("serve: cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  return port_;
}

int MockRmServer::start() {
  bind();
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void MockRmServer::serve() {
  bind();
  impl_->server.listen_after_bind();
}

void MockRmServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockRmServer::url() const { return "http://" + config_.host + ":" + std::to_string(port_); }

}  // namespace rms
