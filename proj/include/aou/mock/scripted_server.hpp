#pragma once

#include <memory>
#include <string>
#include <vector>

#include "aou/errors.hpp"

namespace aou::mock {

// One scripted completion rule. A request matches when every match_all
// substring occurs in the concatenated message contents; the k-th matching
// call gets responses[k] (last response repeats). fail_first serves that
// many HTTP 500s before the scripted responses, for retry exercises.
struct ScriptRule {
    std::vector<std::string> match_all;
    std::vector<std::string> responses;
    int fail_first = 0;
};

// Minimal chat-completions endpoint driven by a script; binds 127.0.0.1 on
// an ephemeral port. Unmatched requests get HTTP 404 so misconfigured runs
// fail loudly.
class ScriptedServer {
public:
    explicit ScriptedServer(std::vector<ScriptRule> rules);
    ~ScriptedServer();
    ScriptedServer(const ScriptedServer&) = delete;
    ScriptedServer& operator=(const ScriptedServer&) = delete;

    int start(int port = 0);  // 0 binds an ephemeral port; returns the bound port
    void stop();
    void wait();  // blocks until the listener stops
    std::string base_url() const;
    long long request_count() const;
    long long unmatched_count() const;

    static std::vector<ScriptRule> load_script(const std::string& path);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace aou::mock
