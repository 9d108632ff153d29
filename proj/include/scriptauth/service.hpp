#pragma once

// HTTP facade over a single model file.
//
//   POST /enroll     {"label", "image"}                 -> {"index"}
//   POST /train      {"learning_rate"?, "max_error"?, "max_iterations"?} -> 202
//   GET  /status                                        -> {"state", "last_report", ...}
//   POST /recognize  {"image"}                          -> RecognitionResult
//   POST /verify     {"image", "claim", "threshold"?}   -> {"accepted", "result"}
//
// Images are base64 PNG/PGM. Training runs on a worker thread against a copy
// of the model; reads keep using the last trained snapshot until the new one
// is swapped in.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>

namespace scriptauth::service {

struct ServiceOptions {
  std::filesystem::path model_path;
  /// Runs on the training thread before training starts (tests use it to
  /// hold the service in the training state).
  std::function<void()> before_training;
};

class Service {
 public:
  /// Loads the model at options.model_path. Throws scriptauth::Error.
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves until stop(). Returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it (or -1); pair with serve().
  int bind_any_port(const std::string& host);
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking entry point used by `scriptauth serve`.
int run_server(const std::filesystem::path& model_path, const std::string& host, int port);

}  // namespace scriptauth::service
