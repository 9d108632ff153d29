#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scriptauth/auth.hpp"
#include "scriptauth/encoding.hpp"
#include "scriptauth/network.hpp"

namespace scriptauth::persistence {

inline constexpr std::string_view kModelMagic = "SCRIPTAUTH-MODEL";
inline constexpr int kFormatVersion = 1;

/// `<root>/<label>/<image files>`, both levels sorted bytewise. Dot-files are
/// ignored.
struct TrainingFolder {
  std::filesystem::path root;
  struct Entry {
    std::string label;
    std::vector<std::filesystem::path> files;
  };
  std::vector<Entry> entries;
};

/// Throws MissingDirectory, NoLabels, or EmptyTrainingSet (label without files).
TrainingFolder scan_training_folder(const std::filesystem::path& root);

struct TrainingSet {
  std::vector<nn::TrainingSample> samples;
  auth::LabelRegistry registry;
};

/// Registers labels in folder order (capacity = output units) and encodes
/// every image. Undecodable files are reported with their path.
TrainingSet load_training_folder(const std::filesystem::path& root,
                                 const encoding::EncodingConfig& cfg, std::size_t capacity);

/// Deterministic part of a TrainingReport (wall-clock time is not persisted).
struct TrainingSummary {
  double final_error = 0.0;
  std::size_t iterations_run = 0;
  bool converged = false;

  friend bool operator==(const TrainingSummary&, const TrainingSummary&) = default;
};

struct Model {
  encoding::EncodingConfig encoding;
  nn::Network network;
  nn::TrainingConfig training;
  auth::LabelRegistry registry;
  auth::AuthPolicy policy;
  bool trained = false;
  std::optional<TrainingSummary> last_training;
};

/// JSON text document; doubles are written in shortest round-trip form.
std::string serialize_model(const Model& model);
/// Throws CorruptModel or UnsupportedVersion.
Model parse_model(std::string_view text);

/// Writes through a temporary file and renames it into place. IoFailure on error.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace scriptauth::persistence
