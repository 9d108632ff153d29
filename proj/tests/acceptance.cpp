// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "scriptauth/auth.hpp"
#include "scriptauth/cli.hpp"
#include "scriptauth/encoding.hpp"
#include "scriptauth/image_io.hpp"
#include "scriptauth/network.hpp"
#include "scriptauth/persistence.hpp"
#include "service_fixture.hpp"
#include "test_support.hpp"

using namespace scriptauth;
using namespace scriptauth::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Cli {
  int code;
  std::string out;
};

Cli cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str() + err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const fs::path kFive = data_dir() / "glyphs" / "five";
const fs::path kAvs1 = data_dir() / "glyphs" / "a_vs_1";

// A1: analytic gradients against central differences.
Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  auto pick = [&](std::size_t lo, std::size_t hi) { return lo + rng() % (hi - lo + 1); };
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const nn::NetworkTopology t{pick(4, 32), {pick(2, 16)}, pick(2, 8)};
    const auto net = nn::Network::initialize(t, rng());
    const nn::TrainingSample sample{random_bipolar(t.input_units, rng),
                                    one_hot(t.output_units, rng() % t.output_units)};
    worst = std::max(worst, nn::gradient_check(net, sample, 1e-5));
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "max relative deviation " << worst << " over 100 nets (limit 1e-4), " << secs << " s (limit 30)";
  return {worst <= 1e-4 && secs < 30.0, d.str()};
}

// A2 + A3: convergence on five glyphs and self-recognition afterwards.
std::pair<Outcome, Outcome> convergence_and_self_recognition(const TempDir& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  int converged = 0, perfect = 0;
  std::ostringstream evals;
  for (int seed = 1; seed <= 10; ++seed) {
    const auto model = (dir / ("a2-" + std::to_string(seed) + ".json")).string();
    cli_run({"init", "--model", model, "--grid", "16x16", "--hidden", "30", "--outputs", "5", "--seed",
             std::to_string(seed)});
    const auto train = cli_run({"train", "--model", model, "--data", kFive.string(), "--lr", "0.25",
                                "--max-error", "0.5", "--max-iters", "10000"});
    if (train.code != cli::kOk) continue;
    ++converged;
    const auto eval = cli_run({"eval", "--model", model, "--data", kFive.string()});
    const bool exact = eval.code == 0 && eval.out.find("overall accuracy=1 correct=5 total=5") != std::string::npos;
    perfect += exact;
    if (!exact) evals << " seed " << seed << ": " << eval.out;
  }
  const double secs = seconds_since(t0);
  std::ostringstream a2, a3;
  a2 << converged << "/10 seeds converged (need >= 8), " << secs << " s (limit 60)";
  a3 << perfect << "/" << converged << " converged models report overall accuracy 1" << evals.str();
  return {{converged >= 8 && secs < 60.0, a2.str()},
          {converged > 0 && perfect == converged, a3.str()}};
}

// A4: lightly perturbed "A" is still closer to "A" than to "1".
Outcome perturbed_a(const TempDir& dir) {
  const auto model_path = (dir / "a4.json").string();
  cli_run({"init", "--model", model_path, "--outputs", "2", "--seed", "42"});
  if (cli_run({"train", "--model", model_path, "--data", kAvs1.string()}).code != cli::kOk) {
    return {false, "training on A/1 did not converge"};
  }
  const auto model = persistence::load_model(model_path);
  const auto clean = encoding::encode(image_io::read_file(kAvs1 / "A" / "A.png"), model.encoding);
  const std::size_t flips = clean.size() * 3 / 100;  // 7 of 256 cells

  int wins = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> cells(clean.size());
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng);
    auto grid = clean;
    for (std::size_t k = 0; k < flips; ++k) grid = grid.flipped(cells[k]);
    const auto r = auth::recognize(model.network, model.registry, grid, model.policy);
    const double err_a = r.per_label[*model.registry.index_of("A")].error;
    const double err_1 = r.per_label[*model.registry.index_of("1")].error;
    wins += r.best_label == "A" && err_a < err_1;
    if (seed == 1) d << "e.g. error(A)=" << err_a << " error(1)=" << err_1 << "; ";
  }
  d << wins << "/10 perturbations (" << flips << " flipped cells) recognized as A (need >= 9)";
  return {wins >= 9, d.str()};
}

// A5: reproducible model files and exact round trip.
Outcome determinism_round_trip(const TempDir& dir) {
  std::string files[2];
  for (int i = 0; i < 2; ++i) {
    const auto path = (dir / ("a5-" + std::to_string(i) + ".json")).string();
    cli_run({"init", "--model", path, "--outputs", "5", "--seed", "1234"});
    cli_run({"train", "--model", path, "--data", kFive.string()});
    files[i] = slurp(path);
  }
  const bool identical = !files[0].empty() && files[0] == files[1];

  const auto original = persistence::parse_model(files[0]);
  const auto path = dir / "a5-copy.json";
  persistence::save_model(original, path);
  const auto loaded = persistence::load_model(path);
  std::mt19937_64 rng(5);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    const auto in = random_bipolar(original.network.topology().input_units, rng);
    const auto a = nn::predict(original.network, in), b = nn::predict(loaded.network, in);
    exact += a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
  }
  std::ostringstream d;
  d << "model files byte-identical: " << (identical ? "yes" : "no") << "; " << exact
    << "/100 forward outputs bit-identical after save/load";
  return {identical && exact == 100, d.str()};
}

// A6: normalization and bipolar extremes.
Outcome encoding_oracle() {
  int exact = 0;
  for (int c = 0; c <= 255; ++c) {
    const auto v = encoding::normalize(solid_image(1, 1, {std::uint8_t(c), std::uint8_t(c), std::uint8_t(c)}));
    exact += v.values[0].r == c / 255.0 && v.values[0].g == c / 255.0 && v.values[0].b == c / 255.0;
  }
  const encoding::EncodingConfig cfg;
  const auto black = encoding::encode(png_bytes(solid_image(64, 48, {0, 0, 0})), cfg);
  const auto white = encoding::encode(png_bytes(solid_image(64, 48, {255, 255, 255})), cfg);
  const bool all_ink = std::ranges::all_of(black.values(), [](double v) { return v == 1.0; });
  const bool all_bg = std::ranges::all_of(white.values(), [](double v) { return v == -1.0; });
  std::ostringstream d;
  d << exact << "/256 channel values exact; black -> all +1: " << (all_ink ? "yes" : "no")
    << "; white -> all -1: " << (all_bg ? "yes" : "no");
  return {exact == 256 && all_ink && all_bg, d.str()};
}

// A7: 2-bit bipolar parity on 2-[4]-1 at learning rate 0.25.
Outcome parity() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<nn::TrainingSample> samples{
      {{-1, -1}, {-1}}, {{-1, 1}, {1}}, {{1, -1}, {1}}, {{1, 1}, {-1}}};
  nn::TrainingConfig cfg;
  cfg.learning_rate = 0.25;
  cfg.max_error = 0.1;
  cfg.max_iterations = 20000;
  int converged = 0;
  std::ostringstream errs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto net = nn::Network::initialize({2, {4}, 1}, seed);
    const auto r = nn::train(net, samples, cfg);
    converged += r.converged;
    errs << (seed > 1 ? "," : "") << r.final_error;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << converged << "/10 seeds reached error <= 0.1 (need >= 8), " << secs << " s (limit 10); final errors ["
    << errs.str() << "]";
  return {converged >= 8 && secs < 10.0, d.str()};
}

// A8: HTTP flow agrees with the CLI, and reads during training use the last ready model.
Outcome service_contract(const TempDir& dir) {
  std::ostringstream d;
  const auto probe_a = data_dir() / "glyph_A_40.png";
  const std::vector<std::pair<std::string, fs::path>> checks{
      {"A", probe_a}, {"B", probe_a}, {"C", kFive / "C" / "C.png"}, {"D", kFive / "C" / "C.png"}};

  const auto cli_model = (dir / "a8-cli.json").string();
  cli_run({"init", "--model", cli_model, "--outputs", "5", "--seed", "42"});
  if (cli_run({"train", "--model", cli_model, "--data", kFive.string()}).code != cli::kOk) {
    return {false, "CLI training did not converge"};
  }

  const auto svc_model = (dir / "a8-svc.json").string();
  cli_run({"init", "--model", svc_model, "--outputs", "5", "--seed", "42"});
  Gate gate;
  RunningService svc(svc_model, &gate);
  auto c = svc.client();

  for (const auto& entry : persistence::scan_training_folder(kFive).entries) {
    for (const auto& file : entry.files) {
      if (post(c, "/enroll", {{"label", entry.label}, {"image", image_b64(file)}}).status != 200) {
        return {false, "enroll failed for " + file.string()};
      }
    }
  }
  if (post(c, "/train", {{"learning_rate", 0.25}, {"max_error", 0.5}, {"max_iterations", 10000}}).status != 202) {
    return {false, "/train was not accepted"};
  }
  const auto status = wait_ready(c);
  if (!status.is_object() || status["last_report"]["converged"] != true) {
    return {false, "service training did not reach ready/converged"};
  }

  int agree = 0;
  for (const auto& [claim, image] : checks) {
    const bool cli_accept =
        cli_run({"verify", "--model", cli_model, "--image", image.string(), "--claim", claim}).code == cli::kOk;
    const auto v = post(c, "/verify", {{"image", image_b64(image)}, {"claim", claim}});
    const bool svc_accept = v.status == 200 && v.body["accepted"] == true;
    agree += cli_accept == svc_accept;
    d << claim << ":" << (cli_accept ? "accept" : "reject") << "/" << (svc_accept ? "accept" : "reject") << " ";
  }
  const auto cli_json = cli_run({"recognize", "--model", cli_model, "--image", probe_a.string(), "--json"});
  const auto before = c.Post("/recognize", nlohmann::ordered_json{{"image", image_b64(probe_a)}}.dump(),
                             "application/json");
  const bool same_json = before && before->status == 200 && cli_json.out == before->body + "\n";

  // Second training run, held open by the gate.
  post(c, "/enroll", {{"label", "A"}, {"image", image_b64(probe_a)}});
  gate.close();
  const int train_status = post(c, "/train", nlohmann::ordered_json::object()).status;
  gate.wait_for_waiter();
  const bool training = get(c, "/status").body["state"] == "training";
  const auto during = c.Post("/recognize", nlohmann::ordered_json{{"image", image_b64(probe_a)}}.dump(),
                             "application/json");
  const bool same_answer = during && before && during->status == 200 && during->body == before->body;
  const int enroll_during = post(c, "/enroll", {{"label", "A"}, {"image", image_b64(probe_a)}}).status;
  const int train_during = post(c, "/train", nlohmann::ordered_json::object()).status;
  gate.open();
  const bool ready_again = wait_ready(c).is_object();

  d << "| decisions agree " << agree << "/" << checks.size() << "; recognize JSON identical to CLI: "
    << (same_json ? "yes" : "no") << "; during training: state=" << (training ? "training" : "?")
    << " recognize=previous model " << (same_answer ? "yes" : "no") << " enroll=" << enroll_during
    << " train=" << train_during;
  const bool pass = agree == static_cast<int>(checks.size()) && same_json && train_status == 202 && training &&
                    same_answer && enroll_during == 409 && train_during == 409 && ready_again;
  return {pass, d.str()};
}

}  // namespace

int main() {
  TempDir dir;
  int failures = 0;
  auto report = [&](const char* id, const char* name, const Outcome& o) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << name << ": " << o.detail << std::endl;
    failures += !o.pass;
  };

  report("A1", "gradient correctness", gradient_correctness());
  const auto [a2, a3] = convergence_and_self_recognition(dir);
  report("A2", "convergence on five glyphs", a2);
  report("A3", "self-recognition", a3);
  report("A4", "perturbed A vs 1", perturbed_a(dir));
  report("A5", "determinism and round trip", determinism_round_trip(dir));
  report("A6", "encoding oracle", encoding_oracle());
  report("A7", "bipolar parity toy", parity());
  report("A8", "service contract", service_contract(dir));

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
