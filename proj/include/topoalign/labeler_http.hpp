#pragma once

// HTTP topic labeler. POSTs {"cluster_id": int, "prompts": [str]} and expects
// {"name": str}. The bearer token comes from TOPOALIGN_LABELER_TOKEN.

#include <chrono>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "topoalign/error.hpp"
#include "topoalign/topics.hpp"

namespace topoalign {

inline constexpr const char* kLabelerTokenEnv = "TOPOALIGN_LABELER_TOKEN";

class HttpLabeler : public Labeler {
 public:
  // `url` is http://host[:port]/path
  explicit HttpLabeler(const std::string& url, std::string token = token_from_env(),
                       std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : token_(std::move(token)), timeout_(timeout) {
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0)
      throw Error(ErrorKind::InvalidArgument, "labeler url must start with http://");
    const std::string rest = url.substr(scheme.size());
    const auto slash = rest.find('/');
    host_port_ = rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    if (host_port_.empty()) throw Error(ErrorKind::InvalidArgument, "labeler url has no host");
  }

  static std::string token_from_env() {
    const char* t = std::getenv(kLabelerTokenEnv);
    return t ? std::string(t) : std::string();
  }

  std::string label(const LabelRequest& request) override {
    httplib::Client client("http://" + host_port_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    nlohmann::json body;
    body["cluster_id"] = request.cluster_id;
    body["prompts"] = request.prompts;
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
      throw Error(ErrorKind::LabelerUnavailable, "request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw Error(ErrorKind::LabelerUnavailable, "labeler returned HTTP " + std::to_string(res->status));
    try {
      const auto reply = nlohmann::json::parse(res->body);
      return reply.at("name").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::LabelerUnavailable, std::string("malformed labeler reply: ") + e.what());
    }
  }

 private:
  std::string host_port_;
  std::string path_;
  std::string token_;
  std::chrono::milliseconds timeout_;
};

}  // namespace topoalign
