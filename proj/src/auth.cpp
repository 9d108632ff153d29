#include "scriptauth/auth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scriptauth/error.hpp"

namespace scriptauth::auth {

LabelRegistry::LabelRegistry(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw Error(ErrorKind::InvalidConfig, "registry capacity must be >= 1");
}

LabelRegistry::LabelRegistry(std::size_t capacity, const std::vector<std::string>& labels)
    : LabelRegistry(capacity) {
  for (const auto& label : labels) register_label(label);
}

std::size_t LabelRegistry::register_label(const std::string& label) {
  if (label.empty()) throw Error(ErrorKind::InvalidConfig, "label must be non-empty");
  if (contains(label)) throw Error(ErrorKind::DuplicateLabel, "label '" + label + "' exists");
  if (labels_.size() >= capacity_) {
    throw Error(ErrorKind::CapacityExceeded, "cannot register '" + label + "': all " +
                                                 std::to_string(capacity_) +
                                                 " output units are taken");
  }
  labels_.push_back(label);
  return labels_.size() - 1;
}

std::optional<std::size_t> LabelRegistry::index_of(const std::string& label) const {
  const auto it = std::ranges::find(labels_, label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<double> LabelRegistry::target_vector(const std::string& label) const {
  const auto index = index_of(label);
  if (!index) throw Error(ErrorKind::UnknownLabel, "label '" + label + "' is not registered");
  return target_vector(*index);
}

std::vector<double> LabelRegistry::target_vector(std::size_t index) const {
  if (index >= labels_.size()) throw Error(ErrorKind::UnknownLabel, "label index out of range");
  std::vector<double> target(capacity_, -1.0);
  target[index] = 1.0;
  return target;
}

void AuthPolicy::validate() const {
  if (!(accept_threshold > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "accept_threshold must be positive");
  }
  if (require_margin && !(*require_margin > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "margin must be positive when set");
  }
}

std::vector<LabelError> RecognitionResult::ranked() const {
  std::vector<LabelError> sorted = per_label;
  std::ranges::stable_sort(sorted, {}, &LabelError::error);
  return sorted;
}

RecognitionResult score_output(std::span<const double> output, const LabelRegistry& reg,
                               const AuthPolicy& policy) {
  policy.validate();
  if (reg.empty()) throw Error(ErrorKind::EmptyRegistry, "no labels registered");
  if (output.size() != reg.capacity()) {
    throw Error(ErrorKind::DimensionMismatch, "network output size differs from label capacity");
  }

  RecognitionResult result;
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const double e = nn::sample_error(output, reg.target_vector(i));
    result.per_label.push_back({reg.labels()[i], e});
    if (i == 0 || e < result.best_error) {
      if (i != 0) second = result.best_error;
      result.best_error = e;
      result.best_index = i;
    } else {
      second = std::min(second, e);
    }
  }
  result.best_label = reg.labels()[result.best_index];

  result.accepted = result.best_error <= policy.accept_threshold;
  // With a single label there is no runner-up, so the margin holds trivially.
  if (policy.require_margin && std::isfinite(second)) {
    result.accepted = result.accepted && (second - result.best_error >= *policy.require_margin);
  }
  return result;
}

RecognitionResult recognize(const nn::Network& net, const LabelRegistry& reg,
                            std::span<const double> input, const AuthPolicy& policy) {
  if (reg.empty()) throw Error(ErrorKind::EmptyRegistry, "no labels registered");
  return score_output(nn::predict(net, input), reg, policy);
}

RecognitionResult recognize(const nn::Network& net, const LabelRegistry& reg,
                            const encoding::BipolarGrid& input, const AuthPolicy& policy) {
  return recognize(net, reg, std::span<const double>(input.values()), policy);
}

Verification verify(const nn::Network& net, const LabelRegistry& reg,
                    const encoding::BipolarGrid& input, const std::string& claimed_label,
                    const AuthPolicy& policy) {
  if (!reg.contains(claimed_label)) {
    throw Error(ErrorKind::UnknownLabel, "claimed label '" + claimed_label + "' is not registered");
  }
  Verification v{false, recognize(net, reg, input, policy)};
  v.accepted = v.result.accepted && v.result.best_label == claimed_label;
  return v;
}

}  // namespace scriptauth::auth
