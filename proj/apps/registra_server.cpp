/**
 * @file registra_server.cpp
 * @brief HTTP service; data directory from REGISTRA_DATA_DIR
 */
#include <registra/service.hpp>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>

int main(int argc, char** argv) {
    CLI::App app{"registra HTTP service"};
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string static_dir;
    app.add_option("--port", port, "listen port");
    app.add_option("--host", host, "listen address");
    app.add_option("--static", static_dir, "directory served at / (UI bundle)");
    CLI11_PARSE(app, argc, argv);

    const char* env = std::getenv("REGISTRA_LOG");
    const std::string level = env ? env : "info";
    spdlog::set_level(level == "debug" ? spdlog::level::debug : level == "error" ? spdlog::level::err : spdlog::level::info);

    const char* data = std::getenv("REGISTRA_DATA_DIR");
    registra::Service service(data ? data : "registra-data");
    httplib::Server server;
    service.mount(server);
    if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
        spdlog::error("cannot serve static files from {}", static_dir);
        return 3;
    }
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    });
    spdlog::info("listening on {}:{} (data: {})", host, port, service.data_dir().string());
    if (!server.listen(host, port)) {
        spdlog::error("cannot listen on {}:{}", host, port);
        return 4;
    }
    return 0;
}
