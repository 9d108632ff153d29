#include "scriptauth/persistence.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "scriptauth/error.hpp"
#include "scriptauth/image_io.hpp"

namespace scriptauth::persistence {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

TrainingFolder scan_training_folder(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorKind::MissingDirectory, "training folder " + root.string() + " not found");
  }
  const auto hidden = [](const fs::path& p) { return p.filename().string().starts_with('.'); };

  TrainingFolder folder{root, {}};
  for (const auto& dir : fs::directory_iterator(root)) {
    if (!dir.is_directory() || hidden(dir.path())) continue;
    TrainingFolder::Entry entry{dir.path().filename().string(), {}};
    for (const auto& file : fs::directory_iterator(dir.path())) {
      if (file.is_regular_file() && !hidden(file.path())) entry.files.push_back(file.path());
    }
    std::ranges::sort(entry.files, {}, [](const fs::path& p) { return p.filename().string(); });
    folder.entries.push_back(std::move(entry));
  }
  if (folder.entries.empty()) {
    throw Error(ErrorKind::NoLabels, "training folder " + root.string() + " has no label directories");
  }
  std::ranges::sort(folder.entries, {}, &TrainingFolder::Entry::label);
  for (const auto& entry : folder.entries) {
    if (entry.files.empty()) {
      throw Error(ErrorKind::EmptyTrainingSet, "label directory '" + entry.label + "' has no images");
    }
  }
  return folder;
}

TrainingSet load_training_folder(const fs::path& root, const encoding::EncodingConfig& cfg,
                                 std::size_t capacity) {
  cfg.validate();
  const TrainingFolder folder = scan_training_folder(root);
  TrainingSet set{{}, auth::LabelRegistry(capacity)};
  for (const auto& entry : folder.entries) set.registry.register_label(entry.label);

  for (const auto& entry : folder.entries) {
    const auto target = set.registry.target_vector(entry.label);
    for (const auto& file : entry.files) {
      const auto bytes = image_io::read_file(file);
      try {
        set.samples.push_back({encoding::encode(bytes, cfg).values(), target});
      } catch (const Error& e) {
        throw Error(e.kind(), file.string() + ": " + e.what());
      }
    }
  }
  return set;
}

namespace {

json matrix_to_json(const nn::Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

std::size_t get_count(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw Error(ErrorKind::CorruptModel, std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double get_real(const json& j) {
  if (!j.is_number()) throw Error(ErrorKind::CorruptModel, "expected a number");
  return j.get<double>();
}

nn::Layer layer_from_json(const json& j) {
  const std::size_t rows = get_count(j, "rows"), cols = get_count(j, "cols");
  nn::Layer layer{nn::Matrix(rows, cols), {}};
  const json& w = j.at("weights");
  if (!w.is_array() || w.size() != rows) throw Error(ErrorKind::CorruptModel, "weight row count");
  for (std::size_t r = 0; r < rows; ++r) {
    if (!w[r].is_array() || w[r].size() != cols) {
      throw Error(ErrorKind::CorruptModel, "weight column count");
    }
    for (std::size_t c = 0; c < cols; ++c) layer.weights(r, c) = get_real(w[r][c]);
  }
  for (const json& b : j.at("biases")) layer.biases.push_back(get_real(b));
  return layer;
}

}  // namespace

std::string serialize_model(const Model& model) {
  const auto& enc = model.encoding;
  const auto& topo = model.network.topology();
  json doc;
  doc["magic"] = kModelMagic;
  doc["format_version"] = kFormatVersion;
  doc["encoding_config"] = {
      {"grid_width", enc.grid_width},
      {"grid_height", enc.grid_height},
      {"ink_threshold", enc.ink_threshold},
      {"luminance_weights", enc.luminance_weights},
  };
  doc["topology"] = {
      {"input_units", topo.input_units},
      {"hidden_layers", topo.hidden_layers},
      {"output_units", topo.output_units},
  };
  doc["training_config_echo"] = {
      {"learning_rate", model.training.learning_rate},
      {"max_error", model.training.max_error},
      {"max_iterations", model.training.max_iterations},
      {"seed", model.training.seed},
  };
  doc["labels"] = model.registry.labels();
  doc["policy"] = {
      {"accept_threshold", model.policy.accept_threshold},
      {"require_margin", model.policy.require_margin ? json(*model.policy.require_margin) : json()},
  };
  doc["trained"] = model.trained;
  if (model.last_training) {
    doc["last_training"] = {
        {"final_error", model.last_training->final_error},
        {"iterations_run", model.last_training->iterations_run},
        {"converged", model.last_training->converged},
    };
  } else {
    doc["last_training"] = nullptr;
  }
  json layers = json::array();
  for (const auto& layer : model.network.layers()) {
    layers.push_back({
        {"rows", layer.weights.rows()},
        {"cols", layer.weights.cols()},
        {"weights", matrix_to_json(layer.weights)},
        {"biases", layer.biases},
    });
  }
  doc["weights"] = std::move(layers);
  return doc.dump(1) + "\n";
}

Model parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptModel, std::string("not a valid model document: ") + e.what());
  }

  try {
    if (!doc.is_object() || !doc.contains("magic") || doc["magic"] != kModelMagic) {
      throw Error(ErrorKind::CorruptModel, "missing SCRIPTAUTH-MODEL magic");
    }
    const json& version = doc.at("format_version");
    if (!version.is_number_integer() || version.get<long long>() != kFormatVersion) {
      throw Error(ErrorKind::UnsupportedVersion, "format_version " + version.dump() +
                                                     " is not supported (expected " +
                                                     std::to_string(kFormatVersion) + ")");
    }

    const json& enc = doc.at("encoding_config");
    encoding::EncodingConfig encoding_cfg;
    encoding_cfg.grid_width = get_count(enc, "grid_width");
    encoding_cfg.grid_height = get_count(enc, "grid_height");
    encoding_cfg.ink_threshold = get_real(enc.at("ink_threshold"));
    const json& lw = enc.at("luminance_weights");
    if (!lw.is_array() || lw.size() != 3) throw Error(ErrorKind::CorruptModel, "luminance_weights");
    for (std::size_t i = 0; i < 3; ++i) encoding_cfg.luminance_weights[i] = get_real(lw[i]);
    encoding_cfg.validate();

    const json& topo = doc.at("topology");
    nn::NetworkTopology topology;
    topology.input_units = get_count(topo, "input_units");
    topology.output_units = get_count(topo, "output_units");
    for (const json& h : topo.at("hidden_layers")) {
      if (!h.is_number_unsigned()) throw Error(ErrorKind::CorruptModel, "hidden_layers");
      topology.hidden_layers.push_back(h.get<std::size_t>());
    }
    if (topology.input_units != encoding_cfg.cells()) {
      throw Error(ErrorKind::CorruptModel, "input_units does not match the encoding grid");
    }

    const json& tc = doc.at("training_config_echo");
    nn::TrainingConfig training;
    training.learning_rate = get_real(tc.at("learning_rate"));
    training.max_error = get_real(tc.at("max_error"));
    training.max_iterations = get_count(tc, "max_iterations");
    if (!tc.at("seed").is_number_unsigned()) throw Error(ErrorKind::CorruptModel, "seed");
    training.seed = tc.at("seed").get<std::uint64_t>();
    training.validate();

    std::vector<nn::Layer> layers;
    for (const json& l : doc.at("weights")) layers.push_back(layer_from_json(l));
    nn::Network network(topology, std::move(layers));

    auth::LabelRegistry registry(topology.output_units,
                                 doc.at("labels").get<std::vector<std::string>>());

    const json& pol = doc.at("policy");
    auth::AuthPolicy policy;
    policy.accept_threshold = get_real(pol.at("accept_threshold"));
    if (!pol.at("require_margin").is_null()) policy.require_margin = get_real(pol["require_margin"]);
    policy.validate();

    Model model{encoding_cfg, std::move(network), training, std::move(registry), policy,
                doc.at("trained").get<bool>(), std::nullopt};
    if (const json& lt = doc.at("last_training"); !lt.is_null()) {
      model.last_training = TrainingSummary{get_real(lt.at("final_error")),
                                            get_count(lt, "iterations_run"),
                                            lt.at("converged").get<bool>()};
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptModel, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptModel || e.kind() == ErrorKind::UnsupportedVersion) throw;
    throw Error(ErrorKind::CorruptModel, e.what());
  }
}

void save_model(const Model& model, const fs::path& path) {
  const std::string text = serialize_model(model);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw Error(ErrorKind::IoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot replace " + path.string() + ": " + ec.message());
}

Model load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open model " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_model(text.str());
}

}  // namespace scriptauth::persistence
