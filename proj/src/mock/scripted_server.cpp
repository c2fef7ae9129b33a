#include "aou/mock/scripted_server.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "aou/errors.hpp"

namespace aou::mock {

using nlohmann::json;

struct ScriptedServer::Impl {
    std::vector<ScriptRule> rules;
    std::vector<int> counters;
    std::mutex mutex;
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<long long> requests{0};
    std::atomic<long long> unmatched{0};
};

ScriptedServer::ScriptedServer(std::vector<ScriptRule> rules) : impl_(new Impl) {
    impl_->rules = std::move(rules);
    impl_->counters.assign(impl_->rules.size(), 0);

    impl_->server.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
        impl_->requests.fetch_add(1);
        std::string text;
        try {
            json body = json::parse(req.body);
            for (const auto& m : body.value("messages", json::array()))
                text += m.value("content", "") + "\n";
        } catch (const std::exception&) {
            res.status = 400;
            res.set_content(R"({"error":"bad request body"})", "application/json");
            return;
        }

        std::lock_guard<std::mutex> lock(impl_->mutex);
        for (std::size_t i = 0; i < impl_->rules.size(); ++i) {
            const auto& rule = impl_->rules[i];
            bool hit = true;
            for (const auto& needle : rule.match_all)
                hit = hit && text.find(needle) != std::string::npos;
            if (!hit) continue;

            const int k = impl_->counters[i]++;
            if (k < rule.fail_first) {
                res.status = 500;
                res.set_content(R"({"error":"scripted failure"})", "application/json");
                return;
            }
            const std::size_t idx =
                std::min(static_cast<std::size_t>(k - rule.fail_first),
                         rule.responses.empty() ? 0 : rule.responses.size() - 1);
            const std::string content = rule.responses.empty() ? "" : rule.responses[idx];
            json reply{{"id", "mock"},
                       {"object", "chat.completion"},
                       {"choices",
                        json::array({json{{"index", 0},
                                          {"message", json{{"role", "assistant"},
                                                           {"content", content}}},
                                          {"finish_reason", "stop"}}})},
                       {"usage",
                        {{"prompt_tokens", static_cast<long long>(text.size() / 4)},
                         {"completion_tokens", static_cast<long long>(content.size() / 4)}}}};
            res.status = 200;
            res.set_content(reply.dump(), "application/json");
            return;
        }
        impl_->unmatched.fetch_add(1);
        res.status = 404;
        res.set_content(R"({"error":"no script rule matched"})", "application/json");
    });
}

ScriptedServer::~ScriptedServer() { stop(); }

int ScriptedServer::start(int port) {
    if (port > 0) {
        if (!impl_->server.bind_to_port("127.0.0.1", port))
            throw TransportError("mock server failed to bind port " + std::to_string(port));
        impl_->port = port;
    } else {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    }
    if (impl_->port <= 0) throw TransportError("mock server failed to bind a port");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void ScriptedServer::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

void ScriptedServer::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::string ScriptedServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

long long ScriptedServer::request_count() const { return impl_->requests.load(); }

long long ScriptedServer::unmatched_count() const { return impl_->unmatched.load(); }

std::vector<ScriptRule> ScriptedServer::load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open mock script " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw LoadError(std::string("mock script is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw LoadError("mock script must be a JSON array of rules");
    std::vector<ScriptRule> rules;
    for (const auto& r : doc) {
        ScriptRule rule;
        if (r.contains("match_all")) {
            for (const auto& m : r.at("match_all")) rule.match_all.push_back(m.get<std::string>());
        } else if (r.contains("match")) {
            rule.match_all.push_back(r.at("match").get<std::string>());
        }
        for (const auto& resp : r.value("responses", json::array()))
            rule.responses.push_back(resp.get<std::string>());
        if (r.contains("response")) rule.responses.push_back(r.at("response").get<std::string>());
        rule.fail_first = r.value("fail_first", 0);
        rules.push_back(std::move(rule));
    }
    return rules;
}

}  // namespace aou::mock
