#include "scriptauth/wire.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include "scriptauth/error.hpp"

namespace scriptauth::wire {

namespace base64 = boost::beast::detail::base64;

json to_json(const auth::RecognitionResult& result) {
  json errors = json::array();
  for (const auto& e : result.ranked()) errors.push_back({{"label", e.label}, {"error", e.error}});
  return {
      {"best_label", result.best_label},
      {"best_error", result.best_error},
      {"accepted", result.accepted},
      {"errors", std::move(errors)},
  };
}

json to_json(const nn::TrainingReport& report) {
  return {
      {"converged", report.converged},
      {"final_error", report.final_error},
      {"iterations_run", report.iterations_run},
      {"elapsed_seconds", report.elapsed_seconds},
  };
}

std::vector<std::uint8_t> decode_base64(std::string_view text) {
  if (text.starts_with("data:")) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos || text.substr(0, comma).find(";base64") == std::string_view::npos) {
      throw Error(ErrorKind::UndecodableImage, "data URL is not base64 encoded");
    }
    text.remove_prefix(comma + 1);
  }
  std::vector<std::uint8_t> out(base64::decoded_size(text.size()));
  const auto [written, consumed] = base64::decode(out.data(), text.data(), text.size());
  const auto rest = text.substr(consumed);
  if (rest.size() > 2 || rest.find_first_not_of('=') != std::string_view::npos) {
    throw Error(ErrorKind::UndecodableImage, "invalid base64 payload");
  }
  out.resize(written);
  return out;
}

std::string encode_base64(std::span<const std::uint8_t> bytes) {
  std::string out(base64::encoded_size(bytes.size()), '\0');
  out.resize(base64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

}  // namespace scriptauth::wire
