#include "aou/pipeline/client.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "aou/errors.hpp"
#include "aou/util.hpp"

namespace aou::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> validate_config(const LlmConfig& config) {
    std::vector<std::string> out;
    if (!(config.temperature >= 0.0)) out.push_back("temperature must be >= 0");
    if (config.max_tokens < 1) out.push_back("max_tokens must be >= 1");
    if (config.max_retries < 0) out.push_back("max_retries must be >= 0");
    if (config.base_url.empty()) out.push_back("base_url must be set");
    return out;
}

LlmClient::LlmClient(LlmConfig config) : config_(std::move(config)) {
    auto errs = validate_config(config_);
    if (!errs.empty()) throw ConfigError("llm config invalid: " + errs.front());
}

namespace {

json request_fingerprint(const LlmConfig& config, const std::vector<ChatMessage>& messages,
                         int sample_index) {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"model", config.model},
                {"messages", std::move(msgs)},
                {"temperature", config.temperature},
                {"max_tokens", config.max_tokens},
                {"sample_index", sample_index}};
}

LlmUsage usage_from(const json& body) {
    LlmUsage usage;
    if (body.contains("usage") && body.at("usage").is_object()) {
        usage.prompt_tokens = body.at("usage").value("prompt_tokens", 0LL);
        usage.completion_tokens = body.at("usage").value("completion_tokens", 0LL);
    }
    return usage;
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

LlmResult LlmClient::call(const std::vector<ChatMessage>& messages, int sample_index) {
    const json fingerprint = request_fingerprint(config_, messages, sample_index);
    const std::string key = hash128_hex(fingerprint.dump());

    fs::path cache_file;
    if (!config_.cache_dir.empty()) {
        cache_file = fs::path(config_.cache_dir) / (key + ".json");
        std::lock_guard<std::mutex> lock(cache_mutex_);
        std::ifstream in(cache_file, std::ios::binary);
        if (in) {
            json entry;
            try {
                in >> entry;
            } catch (const std::exception& e) {
                throw ProtocolError("unreadable cache entry " + cache_file.string() + ": " +
                                    e.what());
            }
            if (entry.value("request", json{}) != fingerprint)
                throw ProtocolError("cache key collision at " + cache_file.string());
            LlmResult result;
            result.text = entry.value("content", "");
            result.usage.prompt_tokens = entry.value("prompt_tokens", 0LL);
            result.usage.completion_tokens = entry.value("completion_tokens", 0LL);
            result.latency_ms = entry.value("latency_ms", 0.0);
            result.from_cache = true;
            return result;
        }
    }

    const char* key_value =
        config_.api_key_env.empty() ? nullptr : std::getenv(config_.api_key_env.c_str());
    if (!config_.api_key_env.empty() && (key_value == nullptr || *key_value == '\0'))
        throw ConfigError("credential environment variable " + config_.api_key_env +
                          " is not set and the cache is cold");

    json payload{{"model", config_.model},
                 {"messages", fingerprint.at("messages")},
                 {"temperature", config_.temperature},
                 {"max_tokens", config_.max_tokens}};
    if (config_.seed) payload["seed"] = *config_.seed + sample_index;
    const std::string body = payload.dump();

    httplib::Headers headers;
    if (key_value != nullptr && *key_value != '\0')
        headers.emplace("Authorization", std::string("Bearer ") + key_value);

    std::mt19937 jitter_rng(static_cast<std::uint32_t>(std::hash<std::string>{}(key)));
    std::uniform_real_distribution<double> jitter(0.0, 0.1);

    std::string last_error;
    const auto start = std::chrono::steady_clock::now();
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay =
                config_.backoff_initial_s * std::pow(2.0, attempt - 1) + jitter(jitter_rng);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        network_calls_.fetch_add(1);
        httplib::Client http(config_.base_url);
        const auto timeout = std::chrono::milliseconds(
            static_cast<long long>(config_.request_timeout_s * 1000.0));
        http.set_connection_timeout(timeout);
        http.set_read_timeout(timeout);
        http.set_write_timeout(timeout);
        auto res = http.Post(config_.chat_path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (retryable_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 200));

        json parsed;
        try {
            parsed = json::parse(res->body);
        } catch (const std::exception&) {
            throw ProtocolError("endpoint returned a non-JSON body");
        }
        if (!parsed.contains("choices") || !parsed.at("choices").is_array() ||
            parsed.at("choices").empty() || !parsed.at("choices")[0].contains("message"))
            throw ProtocolError("chat completion body lacks choices[0].message");

        LlmResult result;
        result.text = parsed.at("choices")[0].at("message").value("content", "");
        result.usage = usage_from(parsed);
        result.latency_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        result.from_cache = false;

        if (!cache_file.empty()) {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            fs::create_directories(cache_file.parent_path());
            json entry{{"request", fingerprint},
                       {"content", result.text},
                       {"prompt_tokens", result.usage.prompt_tokens},
                       {"completion_tokens", result.usage.completion_tokens},
                       {"latency_ms", result.latency_ms}};
            const fs::path tmp = cache_file.string() + ".tmp";
            {
                std::ofstream out(tmp, std::ios::binary);
                out << entry.dump();
            }
            fs::rename(tmp, cache_file);
        }
        return result;
    }
    throw TransportError("retries exhausted (" + std::to_string(config_.max_retries + 1) +
                         " attempts): " + last_error);
}

}  // namespace aou::pipeline
