#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aou/errors.hpp"

namespace aou::pipeline {

struct LlmConfig {
    std::string base_url = "http://127.0.0.1:8080";
    std::string chat_path = "/v1/chat/completions";
    std::string model = "mock-model";
    double temperature = 1.0;  // protocol default
    int max_tokens = 526;      // protocol default
    double request_timeout_s = 60.0;
    int max_retries = 3;
    double backoff_initial_s = 0.25;
    std::string api_key_env = "AOU_API_KEY";  // empty disables the auth header
    std::string cache_dir;                    // empty disables caching
    std::optional<long long> seed;            // forwarded as "seed" when set
};

std::vector<std::string> validate_config(const LlmConfig& config);

struct ChatMessage {
    std::string role;
    std::string content;
};

struct LlmUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;

    LlmUsage& operator+=(const LlmUsage& o) {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
};

struct LlmResult {
    std::string text;
    LlmUsage usage;
    double latency_ms = 0.0;
    bool from_cache = false;
};

// Chat-completion client with exponential-backoff retries on transport
// errors, 429, and 5xx. Responses are cached under a content hash of
// (model, messages, temperature, max_tokens, sample_index); cache hits make
// no network call and replay the recorded usage and latency.
// Safe for concurrent call() from multiple workers: each request uses its
// own connection, and cache writes are serialized.
class LlmClient {
public:
    explicit LlmClient(LlmConfig config);
    LlmClient(const LlmClient&) = delete;
    LlmClient& operator=(const LlmClient&) = delete;

    LlmResult call(const std::vector<ChatMessage>& messages, int sample_index = 0);

    long long network_calls() const { return network_calls_.load(); }
    const LlmConfig& config() const { return config_; }

private:
    LlmConfig config_;
    std::atomic<long long> network_calls_{0};
    std::mutex cache_mutex_;
};

}  // namespace aou::pipeline
