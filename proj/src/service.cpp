#include "scriptauth/service.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "httplib.h"
#include "scriptauth/error.hpp"
#include "scriptauth/persistence.hpp"
#include "scriptauth/wire.hpp"

namespace scriptauth::service {

using wire::json;

namespace {

enum class State { Idle, Training, Ready };

const char* state_name(State s) {
  switch (s) {
    case State::Idle: return "idle";
    case State::Training: return "training";
    case State::Ready: return "ready";
  }
  return "idle";
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

/// Parses the request body as a JSON object; replies 400 and returns nullopt otherwise.
std::optional<json> body_object(const httplib::Request& req, httplib::Response& res) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    fail(res, 400, "request body must be a JSON object");
    return std::nullopt;
  }
  return body;
}

std::optional<std::string> string_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;

  std::mutex mu;
  State state = State::Idle;
  persistence::Model working;  // latest weights + pending registry
  std::vector<nn::TrainingSample> pending;
  std::shared_ptr<const persistence::Model> ready;  // what reads are served from
  std::optional<nn::TrainingReport> last_report;
  std::optional<nn::EpochProgress> progress;
  std::optional<std::string> last_error;
  std::thread worker;
  std::atomic<bool> stopping{false};

  explicit Impl(ServiceOptions opts)
      : options(std::move(opts)), working(persistence::load_model(options.model_path)) {
    if (working.trained) {
      ready = std::make_shared<const persistence::Model>(working);
      state = State::Ready;
    }
    routes();
  }

  ~Impl() {
    stopping = true;
    server.stop();
    if (worker.joinable()) worker.join();
  }

  std::shared_ptr<const persistence::Model> snapshot() {
    std::lock_guard lock(mu);
    return ready;
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Post("/enroll", [this](const auto& req, auto& res) { enroll(req, res); });
    server.Post("/train", [this](const auto& req, auto& res) { train(req, res); });
    server.Get("/status", [this](const auto& req, auto& res) { status(req, res); });
    server.Post("/recognize", [this](const auto& req, auto& res) { recognize(req, res); });
    server.Post("/verify", [this](const auto& req, auto& res) { verify(req, res); });
  }

  void enroll(const httplib::Request& req, httplib::Response& res) {
    const auto body = body_object(req, res);
    if (!body) return;
    const auto label = string_field(*body, "label");
    const auto image = string_field(*body, "image");
    if (!label || !image) return fail(res, 400, "enroll needs string fields 'label' and 'image'");

    std::lock_guard lock(mu);
    if (state == State::Training) return fail(res, 409, "training in progress");
    try {
      const auto grid = encoding::encode(wire::decode_base64(*image), working.encoding);
      auto& reg = working.registry;
      const std::size_t index = reg.index_of(*label) ? *reg.index_of(*label) : reg.register_label(*label);
      pending.push_back({grid.values(), reg.target_vector(index)});
      reply(res, 200, {{"index", index}});
    } catch (const Error& e) {
      fail(res, 422, e.what());
    }
  }

  void train(const httplib::Request& req, httplib::Response& res) {
    json body = json::object();
    if (!req.body.empty()) {
      const auto parsed = body_object(req, res);
      if (!parsed) return;
      body = *parsed;
    }

    std::lock_guard lock(mu);
    if (state == State::Training) return fail(res, 409, "training already in progress");
    if (pending.empty()) return fail(res, 422, "no enrolled samples");

    nn::TrainingConfig cfg = working.training;
    try {
      if (body.contains("learning_rate")) cfg.learning_rate = body["learning_rate"].get<double>();
      if (body.contains("max_error")) cfg.max_error = body["max_error"].get<double>();
      if (body.contains("max_iterations")) {
        if (!body["max_iterations"].is_number_unsigned()) {
          return fail(res, 422, "max_iterations must be a positive integer");
        }
        cfg.max_iterations = body["max_iterations"].get<std::size_t>();
      }
      cfg.validate();
    } catch (const json::exception& e) {
      return fail(res, 422, e.what());
    } catch (const Error& e) {
      return fail(res, 422, e.what());
    }

    if (worker.joinable()) worker.join();
    state = State::Training;
    progress.reset();
    persistence::Model job = working;
    job.training = cfg;
    worker = std::thread([this, job = std::move(job), samples = pending]() mutable {
      run_training(std::move(job), std::move(samples));
    });
    reply(res, 202, {{"accepted", true}, {"samples", pending.size()}});
  }

  void run_training(persistence::Model job, std::vector<nn::TrainingSample> samples) {
    if (options.before_training) options.before_training();
    const auto report = nn::train(job.network, samples, job.training, [this](const nn::EpochProgress& p) {
      std::lock_guard lock(mu);
      progress = p;
      return !stopping.load();
    });
    job.trained = true;
    job.last_training = persistence::TrainingSummary{report.final_error, report.iterations_run,
                                                     report.converged};

    std::optional<std::string> save_error;
    try {
      persistence::save_model(job, options.model_path);
    } catch (const Error& e) {
      save_error = e.what();
      std::cerr << "scriptauth: " << e.what() << "\n";
    }

    std::lock_guard lock(mu);
    // Enrollment is refused while training, so the registry is unchanged.
    working.network = job.network;
    working.training = job.training;
    working.trained = true;
    working.last_training = job.last_training;
    ready = std::make_shared<const persistence::Model>(std::move(job));
    last_report = report;
    last_error = save_error;
    state = State::Ready;
  }

  void status(const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu);
    json body = {
        {"state", state_name(state)},
        {"last_report", last_report ? wire::to_json(*last_report) : json()},
        {"progress", progress ? json{{"epoch", progress->epoch}, {"error", progress->error}} : json()},
        {"labels", working.registry.labels()},
        {"pending_samples", pending.size()},
    };
    if (last_error) body["last_error"] = *last_error;
    reply(res, 200, body);
  }

  void recognize(const httplib::Request& req, httplib::Response& res) {
    const auto body = body_object(req, res);
    if (!body) return;
    const auto image = string_field(*body, "image");
    if (!image) return fail(res, 400, "recognize needs a string field 'image'");
    const auto model = snapshot();
    if (!model) return fail(res, 409, "no trained model available");
    try {
      const auto grid = encoding::encode(wire::decode_base64(*image), model->encoding);
      reply(res, 200, wire::to_json(auth::recognize(model->network, model->registry, grid, model->policy)));
    } catch (const Error& e) {
      fail(res, 422, e.what());
    }
  }

  void verify(const httplib::Request& req, httplib::Response& res) {
    const auto body = body_object(req, res);
    if (!body) return;
    const auto image = string_field(*body, "image");
    const auto claim = string_field(*body, "claim");
    if (!image || !claim) return fail(res, 400, "verify needs string fields 'image' and 'claim'");
    const auto model = snapshot();
    if (!model) return fail(res, 409, "no trained model available");

    auth::AuthPolicy policy = model->policy;
    if (const auto t = body->find("threshold"); t != body->end() && !t->is_null()) {
      if (!t->is_number()) return fail(res, 422, "threshold must be a number");
      policy.accept_threshold = t->get<double>();
    }
    try {
      policy.validate();
      const auto grid = encoding::encode(wire::decode_base64(*image), model->encoding);
      const auto v = auth::verify(model->network, model->registry, grid, *claim, policy);
      reply(res, 200, {{"accepted", v.accepted}, {"result", wire::to_json(v.result)}});
    } catch (const Error& e) {
      fail(res, 422, e.what());
    }
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() = default;

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool Service::serve() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

int run_server(const std::filesystem::path& model_path, const std::string& host, int port) {
  Service service(ServiceOptions{model_path, {}});
  std::cout << "scriptauth: serving " << model_path.string() << " on http://" << host << ":" << port
            << std::endl;
  if (!service.listen(host, port)) {
    std::cerr << "scriptauth: cannot bind " << host << ":" << port << "\n";
    return 3;
  }
  return 0;
}

}  // namespace scriptauth::service
