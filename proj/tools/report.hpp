#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sha256.hpp"

namespace jumphinf::tools {

struct StageOutcome {
  std::string name;
  std::string status;
  std::string detail;
  double seconds = 0.0;
};

struct RunReport {
  std::string command;
  std::string config_hash;
  std::vector<StageOutcome> stages;
  nlohmann::json certificates = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> manifest;

  nlohmann::json to_json(bool with_timings = true) const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["config_hash"] = config_hash;
    nlohmann::json js = nlohmann::json::array();
    for (const auto& s : stages) {
      nlohmann::json e{{"name", s.name}, {"status", s.status}};
      if (!s.detail.empty()) e["detail"] = s.detail;
      if (with_timings) e["seconds"] = s.seconds;
      js.push_back(std::move(e));
    }
    j["stages"] = std::move(js);
    j["certificates"] = certificates;
    nlohmann::json jf = nlohmann::json::array();
    for (const auto& [path, hash] : manifest)
      jf.push_back({{"path", path}, {"sha256", hash}});
    j["manifest"] = std::move(jf);
    if (with_timings) j["content_hash"] = content_hash();
    return j;
  }

  // Hash of the timing-free serialization; stable across reruns of the same
  // config and seed.
  std::string content_hash() const { return Sha256::of(to_json(false).dump()); }

  std::string to_csv() const {
    std::string out;
    out += "kind,field1,field2,field3\n";
    out += "command," + command + ",,\n";
    out += "config_hash," + config_hash + ",,\n";
    for (const auto& s : stages)
      out += "stage," + s.name + "," + s.status + "," +
             std::to_string(s.seconds) + "\n";
    for (const auto& [path, hash] : manifest)
      out += "manifest," + path + "," + hash + ",\n";
    out += "content_hash," + content_hash() + ",,\n";
    return out;
  }
};

}  // namespace jumphinf::tools
