/*
 * Copyright 2026 The CombNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "combnet/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "combnet/error.hpp"

namespace combnet {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) noexcept {
  auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorCode::Config, "config: bad value '" + value + "' for key '" + key + "'");
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

float to_float(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    float f = std::stof(v, &used);
    if (used != v.size()) bad_value(key, v);
    return f;
  } catch (const std::logic_error&) {
    bad_value(key, v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(to_int(key, s));
  return out;
}

using Setter = std::function<void(NetConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto int_key = [&](const char* name, int NetConfig::*field) {
      t[name] = [field](NetConfig& c, const std::string& k, const std::string& v) {
        c.*field = to_int(k, v);
      };
    };
    auto float_key = [&](const char* name, float NetConfig::*field) {
      t[name] = [field](NetConfig& c, const std::string& k, const std::string& v) {
        c.*field = to_float(k, v);
      };
    };
    auto bool_key = [&](const char* name, bool NetConfig::*field) {
      t[name] = [field](NetConfig& c, const std::string& k, const std::string& v) {
        c.*field = to_bool(k, v);
      };
    };
    auto list_key = [&](const char* name, std::vector<int> NetConfig::*field) {
      t[name] = [field](NetConfig& c, const std::string& k, const std::string& v) {
        c.*field = to_int_list(k, v);
      };
    };
    t["resolution"] = [](NetConfig& c, const std::string& k, const std::string& v) {
      const auto x = v.find('x');
      if (x == std::string::npos) {
        c.input_h = c.input_w = to_int(k, v);
      } else {
        c.input_h = to_int(k, trim(v.substr(0, x)));
        c.input_w = to_int(k, trim(v.substr(x + 1)));
      }
    };
    int_key("tier1_channels", &NetConfig::tier1_channels);
    int_key("tier2_channels", &NetConfig::tier2_channels);
    int_key("tier2_bottleneck", &NetConfig::tier2_bottleneck);
    int_key("tier2_groups", &NetConfig::tier2_groups);
    int_key("tier3_channels", &NetConfig::tier3_channels);
    int_key("tier3_bottleneck", &NetConfig::tier3_bottleneck);
    int_key("tier3_groups", &NetConfig::tier3_groups);
    int_key("tier3_units", &NetConfig::tier3_units);
    list_key("dilations", &NetConfig::dilations);
    int_key("keypoints_per_hand", &NetConfig::keypoints_per_hand);
    int_key("aux_keypoints_per_hand", &NetConfig::aux_keypoints_per_hand);
    int_key("orientation_classes", &NetConfig::orientation_classes);
    int_key("pose_classes", &NetConfig::pose_classes);
    int_key("segmentation_classes", &NetConfig::segmentation_classes);
    int_key("lane_width", &NetConfig::lane_width);
    float_key("bn_epsilon", &NetConfig::bn_epsilon);
    bool_key("aux_keypoint_head", &NetConfig::aux_keypoint_head);
    bool_key("segmentation_head", &NetConfig::segmentation_head);
    bool_key("deep_supervision", &NetConfig::deep_supervision);
    bool_key("orientation_head", &NetConfig::orientation_head);
    bool_key("pose_head", &NetConfig::pose_head);
    list_key("fingertips", &NetConfig::fingertips);
    list_key("aux_fingertips", &NetConfig::aux_fingertips);
    float_key("orientation_eps", &NetConfig::orientation_eps);
    float_key("conf_threshold", &NetConfig::conf_threshold);
    float_key("keypoint_threshold", &NetConfig::keypoint_threshold);
    float_key("hand_threshold", &NetConfig::hand_threshold);
    int_key("depth_window", &NetConfig::depth_window);
    float_key("z_min", &NetConfig::z_min);
    float_key("z_max", &NetConfig::z_max);
    t["amplitude_coeffs"] = [](NetConfig& c, const std::string& k, const std::string& v) {
      const auto items = split_list(v);
      if (items.size() != 4) bad_value(k, v);
      for (std::size_t i = 0; i < 4; ++i) c.amplitude_coeffs[i] = to_float(k, items[i]);
    };
    return t;
  }();
  return table;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string fmt_float(float f) {
  // Shortest text that parses back to the same float.
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), f);
  return std::string(buf, p);
}

}  // namespace

NetConfig parse_config(const std::string& text) {
  NetConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::Config,
            "config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    require(it != setters().end(), ErrorCode::Config,
            "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(cfg, key, value);
  }
  return cfg;
}

NetConfig load_config(const std::string& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorCode::MissingInput, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const NetConfig& c) {
  std::ostringstream os;
  os << "resolution = " << c.input_h << "x" << c.input_w << "\n"
     << "tier1_channels = " << c.tier1_channels << "\n"
     << "tier2_channels = " << c.tier2_channels << "\n"
     << "tier2_bottleneck = " << c.tier2_bottleneck << "\n"
     << "tier2_groups = " << c.tier2_groups << "\n"
     << "tier3_channels = " << c.tier3_channels << "\n"
     << "tier3_bottleneck = " << c.tier3_bottleneck << "\n"
     << "tier3_groups = " << c.tier3_groups << "\n"
     << "tier3_units = " << c.tier3_units << "\n"
     << "dilations = " << join(c.dilations) << "\n"
     << "keypoints_per_hand = " << c.keypoints_per_hand << "\n"
     << "aux_keypoints_per_hand = " << c.aux_keypoints_per_hand << "\n"
     << "orientation_classes = " << c.orientation_classes << "\n"
     << "pose_classes = " << c.pose_classes << "\n"
     << "segmentation_classes = " << c.segmentation_classes << "\n"
     << "lane_width = " << c.lane_width << "\n"
     << "bn_epsilon = " << fmt_float(c.bn_epsilon) << "\n"
     << "aux_keypoint_head = " << (c.aux_keypoint_head ? "true" : "false") << "\n"
     << "segmentation_head = " << (c.segmentation_head ? "true" : "false") << "\n"
     << "deep_supervision = " << (c.deep_supervision ? "true" : "false") << "\n"
     << "orientation_head = " << (c.orientation_head ? "true" : "false") << "\n"
     << "pose_head = " << (c.pose_head ? "true" : "false") << "\n"
     << "fingertips = " << join(c.fingertips) << "\n"
     << "aux_fingertips = " << join(c.aux_fingertips) << "\n"
     << "orientation_eps = " << fmt_float(c.orientation_eps) << "\n"
     << "conf_threshold = " << fmt_float(c.conf_threshold) << "\n"
     << "keypoint_threshold = " << fmt_float(c.keypoint_threshold) << "\n"
     << "hand_threshold = " << fmt_float(c.hand_threshold) << "\n"
     << "depth_window = " << c.depth_window << "\n"
     << "z_min = " << fmt_float(c.z_min) << "\n"
     << "z_max = " << fmt_float(c.z_max) << "\n"
     << "amplitude_coeffs = " << fmt_float(c.amplitude_coeffs[0]) << ","
     << fmt_float(c.amplitude_coeffs[1]) << "," << fmt_float(c.amplitude_coeffs[2]) << ","
     << fmt_float(c.amplitude_coeffs[3]) << "\n";
  return os.str();
}

std::uint64_t config_hash(const NetConfig& cfg) {
  const std::string text = config_to_text(cfg);
  return fnv1a64(text.data(), text.size());
}

}  // namespace combnet
