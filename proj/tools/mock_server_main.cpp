// Standalone scripted chat-completion endpoint for offline runs and demos.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "aou/mock/scripted_server.hpp"

namespace {
aou::mock::ScriptedServer* g_server = nullptr;
void handle_signal(int) {
    if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scripted mock chat-completion server"};
    std::string script;
    int port = 0;
    app.add_option("--script", script, "script JSON (rules with match_all/responses)")
        ->required();
    app.add_option("--port", port, "port to bind (default: ephemeral)");
    CLI11_PARSE(app, argc, argv);

    try {
        aou::mock::ScriptedServer server(aou::mock::ScriptedServer::load_script(script));
        g_server = &server;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        const int bound = server.start(port);
        std::cout << "listening on http://127.0.0.1:" << bound << std::endl;
        server.wait();  // start() listens on a background thread
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
