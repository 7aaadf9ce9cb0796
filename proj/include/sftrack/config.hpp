#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "sftrack/error.hpp"
#include "sftrack/keyvalue.hpp"

namespace sftrack {

struct PatchSize {
  int width = 32;
  int height = 32;
  friend bool operator==(const PatchSize&, const PatchSize&) = default;
};

/// Every tunable of the tracker. Field names double as config-file keys.
struct TrackerConfig {
  double tau = 0.7;  // D_high takes score > tau
  double rho = 0.6;  // low-confidence initiation threshold
  int grace_frames = 30;
  int hist_bins_per_channel = 8;
  PatchSize mse_patch_size{};
  double iou_gate_first = 0.1;
  double iou_gate_second = 0.1;
  double min_fused_sim_first = 0.1;
  double min_fused_sim_second = 0.1;
  double embedding_ema_momentum = 0.9;
  bool mc_enabled = true;
  int mc_downscale = 2;
  bool low_init_enabled = true;
  bool traditional_second_assoc = true;

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

namespace detail {

inline void require_unit(double v, const char* key) {
  if (!(v >= 0.0 && v <= 1.0))
    throw InputError(std::string("config key '") + key + "' must lie in [0,1]");
}

inline PatchSize parse_patch(const kv::Entry& e, const std::string& source) {
  const auto x = e.value.find('x');
  if (x == std::string::npos)
    throw ParseError(source, e.line, "key 'mse_patch_size': expected WxH, got '" + e.value + "'");
  kv::Entry w = e, h = e;
  w.value = std::string(kv::trim(std::string_view(e.value).substr(0, x)));
  h.value = std::string(kv::trim(std::string_view(e.value).substr(x + 1)));
  return {static_cast<int>(kv::to_int(w, source)), static_cast<int>(kv::to_int(h, source))};
}

}  // namespace detail

inline void validate(const TrackerConfig& c) {
  detail::require_unit(c.tau, "tau");
  detail::require_unit(c.rho, "rho");
  detail::require_unit(c.iou_gate_first, "iou_gate_first");
  detail::require_unit(c.iou_gate_second, "iou_gate_second");
  detail::require_unit(c.min_fused_sim_first, "min_fused_sim_first");
  detail::require_unit(c.min_fused_sim_second, "min_fused_sim_second");
  detail::require_unit(c.embedding_ema_momentum, "embedding_ema_momentum");
  if (c.grace_frames < 1) throw InputError("config key 'grace_frames' must be >= 1");
  if (c.hist_bins_per_channel < 1 || c.hist_bins_per_channel > 256)
    throw InputError("config key 'hist_bins_per_channel' must lie in [1,256]");
  if (c.mse_patch_size.width < 1 || c.mse_patch_size.height < 1)
    throw InputError("config key 'mse_patch_size' must be positive");
  if (c.mc_downscale < 1) throw InputError("config key 'mc_downscale' must be >= 1");
}

/// Parses config text on top of the built-in defaults. Unknown keys are errors.
inline TrackerConfig parse_config(std::string_view text, const std::string& source = {}) {
  TrackerConfig c;
  for (const auto& e : kv::parse(text, source)) {
    if (!e.section.empty())
      throw ParseError(source, e.line, "unexpected section '" + e.section + "' in tracker config");
    const std::string& k = e.key;
    if (k == "tau") c.tau = kv::to_double(e, source);
    else if (k == "rho") c.rho = kv::to_double(e, source);
    else if (k == "grace_frames") c.grace_frames = static_cast<int>(kv::to_int(e, source));
    else if (k == "hist_bins_per_channel") c.hist_bins_per_channel = static_cast<int>(kv::to_int(e, source));
    else if (k == "mse_patch_size") c.mse_patch_size = detail::parse_patch(e, source);
    else if (k == "iou_gate_first") c.iou_gate_first = kv::to_double(e, source);
    else if (k == "iou_gate_second") c.iou_gate_second = kv::to_double(e, source);
    else if (k == "min_fused_sim_first") c.min_fused_sim_first = kv::to_double(e, source);
    else if (k == "min_fused_sim_second") c.min_fused_sim_second = kv::to_double(e, source);
    else if (k == "embedding_ema_momentum") c.embedding_ema_momentum = kv::to_double(e, source);
    else if (k == "mc_enabled") c.mc_enabled = kv::to_bool(e, source);
    else if (k == "mc_downscale") c.mc_downscale = static_cast<int>(kv::to_int(e, source));
    else if (k == "low_init_enabled") c.low_init_enabled = kv::to_bool(e, source);
    else if (k == "traditional_second_assoc") c.traditional_second_assoc = kv::to_bool(e, source);
    else throw ParseError(source, e.line, "unknown config key '" + k + "'");
  }
  validate(c);
  return c;
}

inline std::string to_text(const TrackerConfig& c) {
  std::ostringstream os;
  os << "tau = " << kv::format_double(c.tau) << '\n'
     << "rho = " << kv::format_double(c.rho) << '\n'
     << "grace_frames = " << c.grace_frames << '\n'
     << "hist_bins_per_channel = " << c.hist_bins_per_channel << '\n'
     << "mse_patch_size = " << c.mse_patch_size.width << 'x' << c.mse_patch_size.height << '\n'
     << "iou_gate_first = " << kv::format_double(c.iou_gate_first) << '\n'
     << "iou_gate_second = " << kv::format_double(c.iou_gate_second) << '\n'
     << "min_fused_sim_first = " << kv::format_double(c.min_fused_sim_first) << '\n'
     << "min_fused_sim_second = " << kv::format_double(c.min_fused_sim_second) << '\n'
     << "embedding_ema_momentum = " << kv::format_double(c.embedding_ema_momentum) << '\n'
     << "mc_enabled = " << kv::format_bool(c.mc_enabled) << '\n'
     << "mc_downscale = " << c.mc_downscale << '\n'
     << "low_init_enabled = " << kv::format_bool(c.low_init_enabled) << '\n'
     << "traditional_second_assoc = " << kv::format_bool(c.traditional_second_assoc) << '\n';
  return os.str();
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline TrackerConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path), path);
}

}  // namespace sftrack
