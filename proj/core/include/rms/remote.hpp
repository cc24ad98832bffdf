#pragma once

// HTTP wire protocol for the reward-model backends.
//
//   POST /v1/ds-evaluate   body DsInput   -> 200 DsVerdict
//   POST /v1/gp-evaluate   body GpInput   -> 200 GpVerdict
//   400 {"error", "field"} on schema violations, 503 on overload.
//   Authorization: Bearer $RMS_BACKEND_TOKEN

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>

#include "rms/backends.hpp"

namespace rms {

inline constexpr std::string_view kDsPath = "/v1/ds-evaluate";
inline constexpr std::string_view kGpPath = "/v1/gp-evaluate";

/// Failure talking to a remote backend. `status` is the last HTTP status (0
/// when no response arrived); `attempts` counts requests sent.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& message, int status, int attempts, bool retryable,
               std::string field = {})
      : std::runtime_error(message),
        status_(status),
        attempts_(attempts),
        retryable_(retryable),
        field_(std::move(field)) {}

  int status() const noexcept { return status_; }
  int attempts() const noexcept { return attempts_; }
  bool retryable() const noexcept { return retryable_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int status_;
  int attempts_;
  bool retryable_;
  std::string field_;
};

struct RemoteConfig {
  /// "http://host:port"
  std::string base_url;
  std::string token;
  std::chrono::milliseconds timeout{5000};
  /// Retries after the first attempt, on 503 or transport failure.
  int max_retries = 4;
  std::chrono::milliseconds backoff{10};
  std::size_t max_in_flight = 8;
};

/// base_url falls back to RMS_BACKEND_URL, token to RMS_BACKEND_TOKEN.
/// Throws ConfigError when no URL is available.
RemoteConfig remote_config_from_env(std::optional<std::string> base_url = std::nullopt);

/// Shared transport: bounded in-flight requests, bounded exponential retry.
class RemoteClient {
 public:
  explicit RemoteClient(RemoteConfig config);

  json post(std::string_view path, const json& body) const;

  std::size_t requests() const noexcept { return requests_.load(); }
  std::size_t retries() const noexcept { return retries_.load(); }
  const RemoteConfig& config() const noexcept { return config_; }

 private:
  RemoteConfig config_;
  mutable std::counting_semaphore<1024> slots_;
  mutable std::atomic<std::size_t> requests_{0};
  mutable std::atomic<std::size_t> retries_{0};
};

class RemoteDsBackend : public DsBackend {
 public:
  explicit RemoteDsBackend(std::shared_ptr<const RemoteClient> client) : client_(std::move(client)) {}
  DsVerdict ds_evaluate(const DsInput& input) const override;

 private:
  std::shared_ptr<const RemoteClient> client_;
};

class RemoteGpBackend : public GpBackend {
 public:
  explicit RemoteGpBackend(std::shared_ptr<const RemoteClient> client) : client_(std::move(client)) {}
  GpVerdict gp_evaluate(const GpInput& input) const override;

 private:
  std::shared_ptr<const RemoteClient> client_;
};

struct MockServerConfig {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  int port = 0;
  /// When non-empty, requests must carry this bearer token.
  std::string token;
  /// The first N requests are answered with 503.
  std::size_t fail_first = 0;
  DecodeOptions decode;
  /// One line per request; null disables logging.
  std::ostream* log = nullptr;
};

/// Serves the given backends over the wire protocol.
class MockRmServer {
 public:
  MockRmServer(const DsBackend& ds, const GpBackend& gp, MockServerConfig config = {});
  ~MockRmServer();
  MockRmServer(const MockRmServer&) = delete;
  MockRmServer& operator=(const MockRmServer&) = delete;

  /// Binds and serves on a background thread. Returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void serve();
  void stop();

  int port() const noexcept { return port_; }
  std::string url() const;
  std::size_t requests() const noexcept { return requests_.load(); }

 private:
  struct Impl;
  int bind();

  const DsBackend& ds_;
  const GpBackend& gp_;
  MockServerConfig config_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
  std::mutex log_mu_;
};

}  // namespace rms
