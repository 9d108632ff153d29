#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scriptauth/encoding.hpp"
#include "scriptauth/network.hpp"

namespace scriptauth::auth {

/// Ordered label set; the label at position i owns output unit i. Capacity is
/// the network's output unit count.
class LabelRegistry {
 public:
  explicit LabelRegistry(std::size_t capacity);
  LabelRegistry(std::size_t capacity, const std::vector<std::string>& labels);

  /// Appends `label` and returns its index. Throws DuplicateLabel,
  /// CapacityExceeded, or InvalidConfig for an empty label.
  std::size_t register_label(const std::string& label);

  std::optional<std::size_t> index_of(const std::string& label) const;
  bool contains(const std::string& label) const { return index_of(label).has_value(); }

  /// +1 at the label's index, -1 elsewhere. Throws UnknownLabel.
  std::vector<double> target_vector(const std::string& label) const;
  std::vector<double> target_vector(std::size_t index) const;

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const LabelRegistry&, const LabelRegistry&) = default;

 private:
  std::size_t capacity_;
  std::vector<std::string> labels_;
};

struct AuthPolicy {
  double accept_threshold = 1.0;
  std::optional<double> require_margin;

  void validate() const;

  friend bool operator==(const AuthPolicy&, const AuthPolicy&) = default;
};

struct LabelError {
  std::string label;
  double error = 0.0;
};

struct RecognitionResult {
  /// One entry per registered label, in registry order.
  std::vector<LabelError> per_label;
  std::string best_label;
  std::size_t best_index = 0;
  double best_error = 0.0;
  bool accepted = false;

  /// per_label sorted by ascending error; equal errors keep registry order.
  std::vector<LabelError> ranked() const;
};

/// One forward pass, then the 1/2 SSE between the output and every label's
/// target vector. The minimum wins (lowest index on ties); acceptance needs
/// best_error <= accept_threshold and, when a margin is set, a runner-up at
/// least that much worse.
RecognitionResult recognize(const nn::Network& net, const LabelRegistry& reg,
                            std::span<const double> input, const AuthPolicy& policy);
RecognitionResult recognize(const nn::Network& net, const LabelRegistry& reg,
                            const encoding::BipolarGrid& input, const AuthPolicy& policy);

/// Scores a precomputed network output; recognize() is forward + this.
RecognitionResult score_output(std::span<const double> output, const LabelRegistry& reg,
                               const AuthPolicy& policy);

struct Verification {
  bool accepted = false;
  RecognitionResult result;
};

/// Accepts only when recognition is accepted and its best label is the claim.
Verification verify(const nn::Network& net, const LabelRegistry& reg,
                    const encoding::BipolarGrid& input, const std::string& claimed_label,
                    const AuthPolicy& policy);

}  // namespace scriptauth::auth
