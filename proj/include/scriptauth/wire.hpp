#pragma once

// JSON shapes shared by the CLI (--json) and the HTTP service.
//
// RecognitionResult:
//   {"best_label": str, "best_error": num, "accepted": bool,
//    "errors": [{"label": str, "error": num}, ...]}   ascending by error
// TrainingReport:
//   {"converged": bool, "final_error": num, "iterations_run": int,
//    "elapsed_seconds": num}

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scriptauth/auth.hpp"
#include "scriptauth/network.hpp"

namespace scriptauth::wire {

using json = nlohmann::ordered_json;

json to_json(const auth::RecognitionResult& result);
json to_json(const nn::TrainingReport& report);

/// Accepts plain base64 or a `data:<mime>;base64,` URL. Throws
/// Error{UndecodableImage} on malformed input.
std::vector<std::uint8_t> decode_base64(std::string_view text);
std::string encode_base64(std::span<const std::uint8_t> bytes);

}  // namespace scriptauth::wire
