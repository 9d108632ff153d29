#include "scriptauth/cli.hpp"

#include <charconv>
#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "scriptauth/error.hpp"
#include "scriptauth/image_io.hpp"
#include "scriptauth/persistence.hpp"
#include "scriptauth/service.hpp"
#include "scriptauth/wire.hpp"

namespace scriptauth::cli {

namespace {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CapacityExceeded:
      return kCapacity;
    case ErrorKind::IoFailure:
    case ErrorKind::MissingDirectory:
    case ErrorKind::UndecodableImage:
    case ErrorKind::EmptyImage:
    case ErrorKind::CorruptModel:
    case ErrorKind::UnsupportedVersion:
      return kIo;
    default:
      return kUsage;
  }
}

std::string num(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UntrainedModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  std::size_t w = 0, h = 0;
  if (x != std::string::npos) {
    const char* s = text.data();
    const auto r1 = std::from_chars(s, s + x, w);
    const auto r2 = std::from_chars(s + x + 1, s + text.size(), h);
    if (r1.ec == std::errc{} && r1.ptr == s + x && r2.ec == std::errc{} && r2.ptr == s + text.size() &&
        w > 0 && h > 0) {
      return {w, h};
    }
  }
  throw UsageError("--grid expects WxH with positive integers, got '" + text + "'");
}

persistence::Model load_trained(const fs::path& path) {
  auto model = persistence::load_model(path);
  if (!model.trained) throw UntrainedModel(path.string() + " has not been trained yet");
  return model;
}

encoding::BipolarGrid encode_file(const fs::path& image, const encoding::EncodingConfig& cfg) {
  const auto bytes = image_io::read_file(image);
  try {
    return encoding::encode(bytes, cfg);
  } catch (const Error& e) {
    throw Error(e.kind(), image.string() + ": " + e.what());
  }
}

struct InitArgs {
  fs::path model;
  std::string grid = "16x16";
  std::vector<std::size_t> hidden{30};
  long long outputs = 0;
  std::uint64_t seed = 42;
  double lr = 0.25;
  double max_error = 0.5;
  std::size_t max_iters = 10000;
  double threshold = 1.0;
  std::optional<double> margin;
  double ink_threshold = 0.5;
};

int cmd_init(const InitArgs& a, std::ostream& out) {
  if (a.outputs < 1) throw UsageError("--outputs must be >= 1");
  const auto [w, h] = parse_grid(a.grid);
  encoding::EncodingConfig enc;
  enc.grid_width = w;
  enc.grid_height = h;
  enc.ink_threshold = a.ink_threshold;
  enc.validate();

  nn::NetworkTopology topology{w * h, a.hidden, static_cast<std::size_t>(a.outputs)};
  nn::TrainingConfig training{a.lr, a.max_error, a.max_iters, a.seed};
  training.validate();
  auth::AuthPolicy policy{a.threshold, a.margin};
  policy.validate();

  persistence::Model model{enc,    nn::Network::initialize(topology, a.seed),
                           training, auth::LabelRegistry(topology.output_units),
                           policy, false, std::nullopt};
  persistence::save_model(model, a.model);

  out << "initialized " << a.model.string() << " topology " << topology.input_units << "-[";
  for (std::size_t i = 0; i < topology.hidden_layers.size(); ++i) {
    out << (i ? "," : "") << topology.hidden_layers[i];
  }
  out << "]-" << topology.output_units << " seed " << a.seed << "\n";
  return kOk;
}

struct TrainArgs {
  fs::path model;
  fs::path data;
  std::optional<double> lr;
  std::optional<double> max_error;
  std::optional<std::size_t> max_iters;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  auto model = persistence::load_model(a.model);
  auto set = persistence::load_training_folder(a.data, model.encoding,
                                               model.network.topology().output_units);
  if (!model.registry.empty() && model.registry.labels() != set.registry.labels()) {
    throw UsageError("training folder labels differ from the labels already in " + a.model.string());
  }

  if (a.lr) model.training.learning_rate = *a.lr;
  if (a.max_error) model.training.max_error = *a.max_error;
  if (a.max_iters) model.training.max_iterations = *a.max_iters;
  model.training.validate();

  const auto report = nn::train(model.network, set.samples, model.training);
  model.registry = std::move(set.registry);
  model.trained = true;
  model.last_training = persistence::TrainingSummary{report.final_error, report.iterations_run,
                                                     report.converged};
  persistence::save_model(model, a.model);

  out << "converged=" << (report.converged ? "true" : "false") << " error=" << num(report.final_error)
      << " epochs=" << report.iterations_run << " seconds=" << num(report.elapsed_seconds) << "\n";
  return report.converged ? kOk : kNotConverged;
}

struct RecognizeArgs {
  fs::path model;
  fs::path image;
  bool json = false;
};

int cmd_recognize(const RecognizeArgs& a, std::ostream& out) {
  const auto model = load_trained(a.model);
  const auto grid = encode_file(a.image, model.encoding);
  const auto result = auth::recognize(model.network, model.registry, grid, model.policy);
  if (a.json) {
    out << wire::to_json(result).dump() << "\n";
    return kOk;
  }
  out << result.best_label << "\n";
  out << "accepted=" << (result.accepted ? "true" : "false") << " best_error=" << num(result.best_error)
      << "\n";
  for (const auto& e : result.ranked()) out << e.label << "\t" << num(e.error) << "\n";
  return kOk;
}

struct VerifyArgs {
  fs::path model;
  fs::path image;
  std::string claim;
  std::optional<double> threshold;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const auto model = load_trained(a.model);
  auth::AuthPolicy policy = model.policy;
  if (a.threshold) policy.accept_threshold = *a.threshold;
  policy.validate();
  if (!model.registry.contains(a.claim)) {
    throw Error(ErrorKind::UnknownLabel, "claimed label '" + a.claim + "' is not enrolled");
  }
  const auto grid = encode_file(a.image, model.encoding);
  const auto v = auth::verify(model.network, model.registry, grid, a.claim, policy);
  out << (v.accepted ? "accept" : "reject") << " claim=" << a.claim << " best=" << v.result.best_label
      << " best_error=" << num(v.result.best_error) << "\n";
  return v.accepted ? kOk : kRejected;
}

struct EvalArgs {
  fs::path model;
  fs::path data;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto model = load_trained(a.model);
  const auto folder = persistence::scan_training_folder(a.data);
  std::size_t correct = 0, total = 0;
  for (const auto& entry : folder.entries) {
    std::size_t hits = 0;
    for (const auto& file : entry.files) {
      const auto grid = encode_file(file, model.encoding);
      hits += auth::recognize(model.network, model.registry, grid, model.policy).best_label == entry.label;
    }
    const auto n = entry.files.size();
    out << "label=" << entry.label << " accuracy=" << num(double(hits) / double(n))
        << " correct=" << hits << " total=" << n << "\n";
    correct += hits;
    total += n;
  }
  out << "overall accuracy=" << num(double(correct) / double(total)) << " correct=" << correct
      << " total=" << total << "\n";
  return kOk;
}

int cmd_inspect(const fs::path& path, std::ostream& out) {
  const auto model = persistence::load_model(path);
  const auto& t = model.network.topology();
  out << "format_version=" << persistence::kFormatVersion << "\n";
  out << "grid=" << model.encoding.grid_width << "x" << model.encoding.grid_height
      << " ink_threshold=" << num(model.encoding.ink_threshold) << "\n";
  out << "topology=" << t.input_units << "-[";
  for (std::size_t i = 0; i < t.hidden_layers.size(); ++i) out << (i ? "," : "") << t.hidden_layers[i];
  out << "]-" << t.output_units << " parameters=" << model.network.parameter_count() << "\n";
  out << "labels=" << model.registry.size() << "/" << model.registry.capacity();
  for (const auto& l : model.registry.labels()) out << " " << l;
  out << "\n";
  out << "learning_rate=" << num(model.training.learning_rate) << " max_error=" << num(model.training.max_error)
      << " max_iterations=" << model.training.max_iterations << " seed=" << model.training.seed << "\n";
  out << "accept_threshold=" << num(model.policy.accept_threshold);
  if (model.policy.require_margin) out << " margin=" << num(*model.policy.require_margin);
  out << "\ntrained=" << (model.trained ? "true" : "false");
  if (model.last_training) {
    out << " converged=" << (model.last_training->converged ? "true" : "false")
        << " error=" << num(model.last_training->final_error)
        << " epochs=" << model.last_training->iterations_run;
  }
  out << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Handwritten-pattern authentication with a backpropagation network", "scriptauth"};
  app.require_subcommand(1);

  std::function<int()> action;

  InitArgs init;
  auto* c_init = app.add_subcommand("init", "Write an untrained model file");
  c_init->add_option("--model", init.model, "Model file to create")->required();
  c_init->add_option("--grid", init.grid, "Canonical grid, WxH")->capture_default_str();
  c_init->add_option("--hidden", init.hidden, "Hidden layer sizes, e.g. 30 or 40,20")
      ->delimiter(',')
      ->capture_default_str();
  c_init->add_option("--outputs", init.outputs, "Output units (maximum number of labels)")->required();
  c_init->add_option("--seed", init.seed, "Weight initialization seed")->capture_default_str();
  c_init->add_option("--lr", init.lr, "Default learning rate")->capture_default_str();
  c_init->add_option("--max-error", init.max_error, "Default maximum error")->capture_default_str();
  c_init->add_option("--max-iters", init.max_iters, "Default epoch cap")->capture_default_str();
  c_init->add_option("--threshold", init.threshold, "Accept threshold")->capture_default_str();
  c_init->add_option("--margin", init.margin, "Required gap to the runner-up label");
  c_init->add_option("--ink-threshold", init.ink_threshold, "Gray level below which a cell is ink")
      ->capture_default_str();
  c_init->callback([&] { action = [&] { return cmd_init(init, out); }; });

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train on a <label>/<images> folder");
  c_train->add_option("--model", train.model)->required();
  c_train->add_option("--data", train.data, "Training folder")->required();
  c_train->add_option("--lr", train.lr, "Learning rate");
  c_train->add_option("--max-error", train.max_error, "Stop once the epoch error is at most this");
  c_train->add_option("--max-iters", train.max_iters, "Epoch cap");
  c_train->callback([&] { action = [&] { return cmd_train(train, out); }; });

  RecognizeArgs recognize;
  auto* c_rec = app.add_subcommand("recognize", "Rank labels for an image");
  c_rec->add_option("--model", recognize.model)->required();
  c_rec->add_option("--image", recognize.image)->required();
  c_rec->add_flag("--json", recognize.json, "Print the result as JSON");
  c_rec->callback([&] { action = [&] { return cmd_recognize(recognize, out); }; });

  VerifyArgs verify;
  auto* c_ver = app.add_subcommand("verify", "Accept or reject a claimed label");
  c_ver->add_option("--model", verify.model)->required();
  c_ver->add_option("--image", verify.image)->required();
  c_ver->add_option("--claim", verify.claim)->required();
  c_ver->add_option("--threshold", verify.threshold, "Override the model's accept threshold");
  c_ver->callback([&] { action = [&] { return cmd_verify(verify, out); }; });

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Recognition accuracy over a labeled folder");
  c_eval->add_option("--model", eval.model)->required();
  c_eval->add_option("--data", eval.data)->required();
  c_eval->callback([&] { action = [&] { return cmd_eval(eval, out); }; });

  fs::path inspect_model;
  auto* c_inspect = app.add_subcommand("inspect", "Summarize a model file");
  c_inspect->add_option("--model", inspect_model)->required();
  c_inspect->callback([&] { action = [&] { return cmd_inspect(inspect_model, out); }; });

  fs::path serve_model;
  std::string bind = "127.0.0.1";
  int port = 8077;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP service");
  c_serve->add_option("--model", serve_model)->required();
  c_serve->add_option("--bind", bind)->capture_default_str();
  c_serve->add_option("--port", port)->capture_default_str();
  c_serve->callback([&] { action = [&] { return service::run_server(serve_model, bind, port); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "scriptauth: " << e.what() << "\n";
    return kUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    err << "scriptauth: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "scriptauth: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const UntrainedModel& e) {
    err << "scriptauth: " << e.what() << "\n";
    return kUntrained;
  }
}

}  // namespace scriptauth::cli
