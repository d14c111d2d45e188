#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tacit/gateway.hpp"
#include "tacit/tokens.hpp"

namespace tacit {

namespace {

// "http://host:port/path" -> {"http://host:port", "/path"}
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos)
    throw GatewayError(GatewayErrorKind::Config, "endpoint must include a scheme: " + endpoint);
  std::size_t path = endpoint.find('/', scheme + 3);
  if (path == std::string::npos) return {endpoint, "/v1/chat/completions"};
  return {endpoint.substr(0, path), endpoint.substr(path)};
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty())
    throw GatewayError(GatewayErrorKind::Config, "remote backend requires an endpoint");
  std::tie(host_, path_) = split_endpoint(config_.endpoint);
}

ChatResponse RemoteBackend::complete(const ChatRequest& request) {
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array(
      {{{"role", "system"}, {"content", request.profile.system_text}},
       {{"role", "user"}, {"content", request.user_text}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  if (request.request_seed) body["seed"] = *request.request_seed;
  std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  GatewayErrorKind last_kind = GatewayErrorKind::Transport;
  std::string last_message = "no attempt made";
  double backoff_s = config_.backoff_initial_s;
  int attempts = config_.max_retries + 1;

  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff_s));
      backoff_s *= config_.backoff_factor;
    }
    httplib::Client client(host_);
    auto timeout = std::chrono::duration<double>(config_.timeout_s);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto started = std::chrono::steady_clock::now();
    httplib::Result result = client.Post(path_, headers, payload, "application/json");
    double elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (!result) {
      bool timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                       result.error() == httplib::Error::Read ||
                       result.error() == httplib::Error::Write;
      last_kind = timed_out ? GatewayErrorKind::Timeout : GatewayErrorKind::Transport;
      last_message = "request failed: " + httplib::to_string(result.error());
      continue;  // transient
    }
    if (result->status == 401 || result->status == 403)
      throw GatewayError(GatewayErrorKind::Auth,
                         "authentication rejected (HTTP " + std::to_string(result->status) + ")");
    if (result->status != 200) {
      if (transient_status(result->status)) {
        last_kind = GatewayErrorKind::Transport;
        last_message = "HTTP " + std::to_string(result->status);
        continue;
      }
      throw GatewayError(GatewayErrorKind::Transport,
                         "HTTP " + std::to_string(result->status) + ": " + result->body);
    }

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError(GatewayErrorKind::MalformedReply,
                         std::string("backend reply is not JSON: ") + e.what());
    }
    ChatResponse response;
    try {
      response.raw_text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError(GatewayErrorKind::MalformedReply,
                         std::string("backend reply missing choices[0].message.content: ") +
                             e.what());
    }
    if (config_.strip_thinking) response.raw_text = strip_thinking_blocks(response.raw_text);
    if (reply.contains("usage")) {
      response.usage.input_tokens = reply["usage"].value("prompt_tokens", 0);
      response.usage.output_tokens = reply["usage"].value("completion_tokens", 0);
    } else {
      response.usage.input_tokens =
          estimate_tokens(request.profile.system_text) + estimate_tokens(request.user_text);
      response.usage.output_tokens = estimate_tokens(response.raw_text);
    }
    response.usage.latency_s = elapsed_s;
    attach_sections(response, request.profile.reply_schema);
    return response;
  }

  if (config_.max_retries == 0) throw GatewayError(last_kind, last_message);
  throw GatewayError(GatewayErrorKind::RetryExhausted,
                     "gave up after " + std::to_string(attempts) + " attempts; last error: " +
                         last_message);
}

}  // namespace tacit
