#include <httplib.h>
#include <json.hpp>

#include "embedkit/errors.hpp"
#include "embedkit/pipeline.hpp"

namespace embedkit {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string host_port;  // scheme://host:port
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  // No TLS is compiled in, so only plain http endpoints are accepted.
  if (url.rfind("http://", 0) != 0) {
    throw ConfigError("provider.url must start with http://: " + url);
  }
  const auto path_start = url.find('/', 7);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config)
      : config_(std::move(config)), url_(split_url(config_.url)) {}

  GenerationResponse generate(const GenerationRequest& request) override {
    httplib::Client client(url_.host_port);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(0, config_.timeout_ms * 1000);
    if (!config_.token.empty()) client.set_bearer_token_auth(config_.token);

    const json body{{"template_id", request.template_id},
                    {"disease", request.disease},
                    {"max_length", request.max_length}};
    auto result = client.Post(url_.path, body.dump(), "application/json");
    if (!result) {
      throw ProviderError("http provider: transport failure contacting " + config_.url +
                          ": " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
      throw ProviderError("http provider: status " + std::to_string(result->status) +
                          " from " + config_.url);
    }
    json parsed;
    try {
      parsed = json::parse(result->body);
    } catch (const json::parse_error& e) {
      throw ProviderError(std::string("http provider: invalid JSON response: ") + e.what());
    }
    if (!parsed.is_object() || !parsed.contains("text") || !parsed["text"].is_string()) {
      throw ProviderError("http provider: response must be {\"text\": ...}");
    }
    return {parsed["text"].get<std::string>(), name()};
  }

  std::string name() const override { return "http"; }

 private:
  ProviderConfig config_;
  ParsedUrl url_;
};

}  // namespace

std::unique_ptr<Provider> make_http_provider(const ProviderConfig& config) {
  return std::make_unique<HttpProvider>(config);
}

}  // namespace embedkit
