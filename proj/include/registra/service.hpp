/**
 * @file service.hpp
 * @brief HTTP API over recipes, runs, overlays and statistics
 *
 * Layout under the data directory:
 *   recipes/<id>/recipe.json, recipes/<id>/source.png
 *   runs/<run>/run.json, report.json, annotations.json, overlay.png
 *
 * Recipe replacement is optimistic: a PUT over an existing recipe must carry
 * version = stored version + 1, otherwise 409.
 */
#pragma once

#include <registra/inspection.hpp>

#include <httplib.h>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace registra {

class Service {
public:
    explicit Service(std::filesystem::path data_dir);

    /// Registers every route on `server`.
    void mount(httplib::Server& server);

    [[nodiscard]] const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

private:
    std::shared_ptr<const Recipe> recipe(const std::string& id);

    void put_recipe(const httplib::Request& req, httplib::Response& res, const std::string& id);
    void get_recipe(httplib::Response& res, const std::string& id);
    void list_recipes(httplib::Response& res);
    void post_run(const httplib::Request& req, httplib::Response& res, const std::string& id);
    void list_runs(httplib::Response& res, const std::string& id);
    void get_run_file(httplib::Response& res, const std::string& run, const std::string& file);
    void get_stats(httplib::Response& res, const std::string& id);
    void dryrun(const httplib::Request& req, httplib::Response& res, const std::string& id);

    std::filesystem::path data_dir_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const Recipe>> recipes_;
    std::map<std::string, int> run_counters_;
};

}  // namespace registra
