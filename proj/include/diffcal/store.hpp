// Copyright 2026 The diffcal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Non-volatile storage of a CalibrationRecord. File layout:
//
//   diffcal-calibration v<schema_version>
//   <JSON payload, one line>
//   crc32 0x<8 hex digits of the CRC-32 of the payload line>

#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "diffcal/core.hpp"
#include "diffcal/records.hpp"

namespace diffcal::store {

class StoreError : public Error {
 public:
  enum class Kind { kNotCalibrated, kChecksum, kVersion, kValidation, kFormat, kIo };
  StoreError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr const char* kMagic = "diffcal-calibration";

inline std::uint32_t crc32_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

namespace detail {

using nlohmann::json;

inline json to_json(const calib::MotorDirectionFit& f) {
  return {{"deadzone_pwm", f.deadzone_pwm}, {"max_pwm", f.max_pwm},
          {"rate_at_max", f.rate_at_max},   {"slope", f.slope},
          {"intercept", f.intercept}};
}

inline calib::MotorDirectionFit fit_from_json(const json& j) {
  calib::MotorDirectionFit f;
  f.deadzone_pwm = j.at("deadzone_pwm").get<double>();
  f.max_pwm = j.at("max_pwm").get<double>();
  f.rate_at_max = j.at("rate_at_max").get<double>();
  f.slope = j.at("slope").get<double>();
  f.intercept = j.at("intercept").get<double>();
  return f;
}

}  // namespace detail

/// JSON form of a record. Doubles are written with round-trip precision.
inline nlohmann::json record_to_json(const calib::CalibrationRecord& r) {
  using detail::to_json;
  return {
      {"schema_version", r.schema_version},
      {"created_at", r.created_at},
      {"gyro_settle_time", r.gyro_settle_time},
      {"motors",
       {{"left_fwd", to_json(r.motors.left_fwd)},
        {"left_back", to_json(r.motors.left_back)},
        {"right_fwd", to_json(r.motors.right_fwd)},
        {"right_back", to_json(r.motors.right_back)}}},
      {"pid",
       {{"kp", r.pid.kp}, {"ki", r.pid.ki}, {"kd", r.pid.kd}, {"ku", r.pid.ku}, {"tu", r.pid.tu}}},
      {"velocity",
       {{"slope_fwd", r.velocity.slope_fwd},
        {"slope_back", r.velocity.slope_back},
        {"intercept_fwd", r.velocity.intercept_fwd},
        {"intercept_back", r.velocity.intercept_back},
        {"max_command", r.velocity.max_command}}},
  };
}

inline calib::CalibrationRecord record_from_json(const nlohmann::json& j) {
  calib::CalibrationRecord r;
  r.schema_version = j.at("schema_version").get<int>();
  r.created_at = j.at("created_at").get<double>();
  r.gyro_settle_time = j.at("gyro_settle_time").get<double>();
  const auto& m = j.at("motors");
  r.motors.left_fwd = detail::fit_from_json(m.at("left_fwd"));
  r.motors.left_back = detail::fit_from_json(m.at("left_back"));
  r.motors.right_fwd = detail::fit_from_json(m.at("right_fwd"));
  r.motors.right_back = detail::fit_from_json(m.at("right_back"));
  const auto& p = j.at("pid");
  r.pid = {p.at("kp").get<double>(), p.at("ki").get<double>(), p.at("kd").get<double>(),
           p.at("ku").get<double>(), p.at("tu").get<double>()};
  const auto& v = j.at("velocity");
  r.velocity.slope_fwd = v.at("slope_fwd").get<double>();
  r.velocity.slope_back = v.at("slope_back").get<double>();
  r.velocity.intercept_fwd = v.at("intercept_fwd").get<double>();
  r.velocity.intercept_back = v.at("intercept_back").get<double>();
  r.velocity.max_command = v.at("max_command").get<double>();
  return r;
}

/// Serialises a record to the file text.
inline std::string encode(const calib::CalibrationRecord& r) {
  const std::string payload = record_to_json(r).dump();
  char crc[32];
  std::snprintf(crc, sizeof crc, "crc32 0x%08x", crc32_of(payload));
  return std::string(kMagic) + " v" + std::to_string(r.schema_version) + "\n" + payload + "\n" +
         crc + "\n";
}

/// Parses and validates file text.
inline calib::CalibrationRecord decode(const std::string& text) {
  std::istringstream in(text);
  std::string header, payload, trailer;
  if (!std::getline(in, header) || !std::getline(in, payload) || !std::getline(in, trailer)) {
    throw StoreError(StoreError::Kind::kFormat, "calibration file truncated");
  }
  const std::string prefix = std::string(kMagic) + " v";
  if (header.rfind(prefix, 0) != 0) {
    throw StoreError(StoreError::Kind::kFormat, "not a calibration file");
  }
  int version = 0;
  try {
    version = std::stoi(header.substr(prefix.size()));
  } catch (const std::exception&) {
    throw StoreError(StoreError::Kind::kFormat, "unreadable schema version");
  }
  if (version != calib::kSchemaVersion) {
    throw StoreError(StoreError::Kind::kVersion,
                     "unsupported calibration schema version " + std::to_string(version));
  }
  unsigned stored = 0;
  if (std::sscanf(trailer.c_str(), "crc32 0x%8x", &stored) != 1) {
    throw StoreError(StoreError::Kind::kFormat, "missing checksum trailer");
  }
  if (stored != crc32_of(payload)) {
    throw StoreError(StoreError::Kind::kChecksum, "calibration checksum mismatch");
  }
  calib::CalibrationRecord r;
  try {
    r = record_from_json(nlohmann::json::parse(payload));
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(StoreError::Kind::kFormat, std::string("malformed payload: ") + e.what());
  }
  if (r.schema_version != version) {
    throw StoreError(StoreError::Kind::kVersion, "header and payload versions disagree");
  }
  if (!r.complete()) throw StoreError(StoreError::Kind::kValidation, "stored record incomplete");
  return r;
}

/// Called after the temporary file is written and before it replaces the
/// target. Tests use it to simulate a crash at that point.
using WriteHook = std::function<void(const std::filesystem::path& temp)>;

/// Writes atomically: temporary sibling file, flush, then rename over `path`.
inline void save_calibration(const calib::CalibrationRecord& r, const std::filesystem::path& path,
                             const WriteHook& before_rename = {}) {
  if (!r.complete()) throw StoreError(StoreError::Kind::kValidation, "record incomplete");
  if (r.schema_version != calib::kSchemaVersion) {
    throw StoreError(StoreError::Kind::kValidation, "record has a foreign schema version");
  }
  const std::string text = encode(r);
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError(StoreError::Kind::kIo, "cannot open " + temp.string());
    out << text;
    out.flush();
    if (!out) throw StoreError(StoreError::Kind::kIo, "write failed for " + temp.string());
  }
  if (before_rename) before_rename(temp);
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) throw StoreError(StoreError::Kind::kIo, "rename failed: " + ec.message());
}

inline calib::CalibrationRecord load_calibration(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    throw StoreError(StoreError::Kind::kNotCalibrated, "no calibration at " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(StoreError::Kind::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode(buf.str());
}

}  // namespace diffcal::store
