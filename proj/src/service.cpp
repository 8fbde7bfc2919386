#include <registra/service.hpp>
#include <registra/error.hpp>
#include <registra/serialize.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <regex>

namespace registra {

namespace {

namespace fs = std::filesystem;
using json_io::Json;

const std::regex kIdPattern(R"([A-Za-z0-9_][A-Za-z0-9_.-]{0,63})");

bool valid_id(const std::string& id) { return std::regex_match(id, kIdPattern); }

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(json_io::canonical_dump(body), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, Json{{"error", message}});
}

Json diagnostics_json(const std::vector<Diagnostic>& diags) {
    Json out = Json::array();
    for (const auto& d : diags) out.push_back(Json{{"code", d.code}, {"message", d.message}, {"blocks", d.blocks}});
    return out;
}

std::string read_text(const fs::path& p) {
    const auto bytes = read_file(p);
    return {bytes.begin(), bytes.end()};
}

Image decode_upload(const std::string& content) {
    return decode_image(std::span(reinterpret_cast<const std::uint8_t*>(content.data()), content.size()));
}

std::string upload_name(const httplib::MultipartFormData& f) {
    const std::string name = fs::path(f.filename).filename().string();
    return name.empty() ? "image" : name;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Splits "<recipe>-<n>"; recipe ids may themselves contain '-'.
std::optional<std::pair<std::string, int>> split_run_id(const std::string& run) {
    const auto dash = run.rfind('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == run.size()) return std::nullopt;
    const std::string num = run.substr(dash + 1);
    if (!std::all_of(num.begin(), num.end(), [](unsigned char c) { return std::isdigit(c); }) || num.size() > 9) {
        return std::nullopt;
    }
    return std::pair{run.substr(0, dash), std::stoi(num)};
}

}  // namespace

Service::Service(fs::path data_dir) : data_dir_(std::move(data_dir)) {
    fs::create_directories(data_dir_ / "recipes");
    fs::create_directories(data_dir_ / "runs");
    for (const auto& e : fs::directory_iterator(data_dir_ / "runs")) {
        if (auto parts = split_run_id(e.path().filename().string())) {
            int& n = run_counters_[parts->first];
            n = std::max(n, parts->second);
        }
    }
}

std::shared_ptr<const Recipe> Service::recipe(const std::string& id) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = recipes_.find(id); it != recipes_.end()) return it->second;
    }
    const fs::path file = data_dir_ / "recipes" / id / "recipe.json";
    if (!fs::exists(file)) return nullptr;
    auto loaded = std::make_shared<const Recipe>(load_recipe(file));
    std::lock_guard lock(mutex_);
    return recipes_.try_emplace(id, std::move(loaded)).first->second;
}

void Service::mount(httplib::Server& server) {
    auto guarded = [](auto fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                send_error(res, 500, e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            }
        };
    };
    auto with_id = [this](const std::string& id, httplib::Response& res) {
        if (valid_id(id)) return true;
        send_error(res, 404, "unknown id '" + id + "'");
        return false;
    };

    server.Get("/recipes", guarded([this](const httplib::Request&, httplib::Response& res) { list_recipes(res); }));
    server.Put(R"(/recipes/([^/]+))", guarded([this, with_id](const httplib::Request& req, httplib::Response& res) {
                   if (with_id(req.matches[1], res)) put_recipe(req, res, req.matches[1]);
               }));
    server.Get(R"(/recipes/([^/]+))", guarded([this, with_id](const httplib::Request& req, httplib::Response& res) {
                   if (with_id(req.matches[1], res)) get_recipe(res, req.matches[1]);
               }));
    server.Get(R"(/recipes/([^/]+)/source.png)", guarded([this, with_id](const httplib::Request& req, httplib::Response& res) {
                   if (!with_id(req.matches[1], res)) return;
                   const fs::path p = data_dir_ / "recipes" / std::string(req.matches[1]) / "source.png";
                   if (!fs::exists(p)) return send_error(res, 404, "unknown recipe");
                   res.set_content(read_text(p), "image/png");
               }));
    server.Post(R"(/recipes/([^/]+)/runs)", guarded([this, with_id](const httplib::Request& req, httplib::Response& res) {
                    if (with_id(req.matches[1], res)) post_run(req, res, req.matches[1]);
                }));
    server.Get(R"(/recipes/([^/]+)/runs)", guarded([this, with_id](const httplib::Request& req, httplib::Response& res) {
                   if (with_id(req.matches[1], res)) list_runs(res, req.matches[1]);
               }));
    server.Get(R"(/recipes/([^/]+)/stats)", guarded([this, with_id](const httplib::Request& req, httplib::Response& res) {
                   if (with_id(req.matches[1], res)) get_stats(res, req.matches[1]);
               }));
    server.Post(R"(/recipes/([^/]+)/dryrun)", guarded([this, with_id](const httplib::Request& req, httplib::Response& res) {
                    if (with_id(req.matches[1], res)) dryrun(req, res, req.matches[1]);
                }));
    server.Get(R"(/runs/([^/]+)/(overlay\.png|annotations\.json|report\.json|run\.json))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                   get_run_file(res, req.matches[1], req.matches[2]);
               }));
    server.Get(R"(/runs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                   get_run_file(res, req.matches[1], "run.json");
               }));
}

void Service::put_recipe(const httplib::Request& req, httplib::Response& res, const std::string& id) {
    if (!req.is_multipart_form_data() || !req.has_file("recipe")) {
        return send_error(res, 400, "expected multipart form with a 'recipe' field and a 'source' image");
    }
    RecipeDocument doc;
    try {
        doc = parse_recipe_text(req.get_file_value("recipe").content);
    } catch (const Error& e) {
        return send_json(res, 422, Json{{"error", e.what()}});
    }
    if (doc.id != id) return send_error(res, 422, "recipe id '" + doc.id + "' does not match the URL");
    if (auto diags = check_recipe(doc); !diags.empty()) {
        return send_json(res, 422, Json{{"error", "invalid recipe"}, {"diagnostics", diagnostics_json(diags)}});
    }

    const fs::path dir = data_dir_ / "recipes" / id;
    const auto existing = recipe(id);
    Image source;
    try {
        if (req.has_file("source")) {
            source = decode_upload(req.get_file_value("source").content);
        } else if (existing) {
            source = existing->source;
        } else {
            return send_error(res, 422, "a new recipe needs a 'source' image");
        }
    } catch (const Error& e) {
        return send_error(res, 422, e.what());
    }
    doc.source_image = "source.png";
    std::shared_ptr<const Recipe> compiled;
    try {
        compiled = std::make_shared<const Recipe>(compile_recipe(doc, source));
    } catch (const Error& e) {
        return send_error(res, 422, e.what());
    }

    std::lock_guard lock(mutex_);
    const auto it = recipes_.find(id);
    const int current = it == recipes_.end() ? 0 : it->second->doc.version;
    if (current > 0 && doc.version != current + 1) {
        return send_json(res, 409, Json{{"error", "version conflict: expected " + std::to_string(current + 1)},
                                        {"current_version", current}});
    }
    // Write to a temporary directory and swap it in.
    const fs::path tmp = data_dir_ / "recipes" / ("." + id + ".tmp");
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    save_image(source, tmp / "source.png");
    write_text(tmp / "recipe.json", serialize_recipe(compiled->doc));
    fs::remove_all(dir);
    fs::rename(tmp, dir);
    recipes_[id] = compiled;
    send_json(res, current > 0 ? 200 : 201, recipe_to_json(compiled->doc));
}

void Service::get_recipe(httplib::Response& res, const std::string& id) {
    const auto r = recipe(id);
    if (!r) return send_error(res, 404, "unknown recipe '" + id + "'");
    send_json(res, 200, recipe_to_json(r->doc));
}

void Service::list_recipes(httplib::Response& res) {
    Json list = Json::array();
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(data_dir_ / "recipes")) {
        const std::string name = e.path().filename().string();
        if (e.is_directory() && valid_id(name) && fs::exists(e.path() / "recipe.json")) ids.push_back(name);
    }
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
        if (const auto r = recipe(id)) list.push_back(Json{{"id", id}, {"version", r->doc.version}});
    }
    send_json(res, 200, Json{{"recipes", list}});
}

void Service::post_run(const httplib::Request& req, httplib::Response& res, const std::string& id) {
    const auto r = recipe(id);
    if (!r) return send_error(res, 404, "unknown recipe '" + id + "'");
    if (!req.is_multipart_form_data() || !req.has_file("image")) {
        return send_error(res, 400, "expected multipart form with an 'image' file");
    }
    const auto& file = req.get_file_value("image");
    Image target;
    try {
        target = decode_upload(file.content);
    } catch (const Error& e) {
        return send_error(res, 422, e.what());
    }
    const InspectionReport report = inspect(*r, target, upload_name(file));

    std::string run_id;
    {
        std::lock_guard lock(mutex_);
        run_id = id + "-" + std::to_string(++run_counters_[id]);
    }
    const fs::path dir = data_dir_ / "runs" / run_id;
    fs::create_directories(dir);
    write_text(dir / "report.json", serialize_report(report));
    write_text(dir / "annotations.json", json_io::canonical_dump(json_io::annotations_to_json(report.annotations)));
    save_png(render_overlay(report, target), dir / "overlay.png");
    const std::string base = "/runs/" + run_id;
    const Json record{{"id", run_id},
                      {"recipe", id},
                      {"recipe_version", r->doc.version},
                      {"created_at", utc_now()},
                      {"verdict", std::string(to_string(report.overall))},
                      {"timing",
                       Json{{"registration_ms", report.timing.registration_ms},
                            {"tools_ms", report.timing.tools_ms},
                            {"total_ms", report.timing.total_ms}}},
                      {"links",
                       Json{{"report", base + "/report.json"},
                            {"annotations", base + "/annotations.json"},
                            {"overlay", base + "/overlay.png"}}}};
    write_text(dir / "run.json", json_io::canonical_dump(record));
    Json body = record;
    body["report"] = report_to_json(report);
    send_json(res, 200, body);
}

void Service::list_runs(httplib::Response& res, const std::string& id) {
    if (!recipe(id)) return send_error(res, 404, "unknown recipe '" + id + "'");
    std::vector<std::pair<int, std::string>> runs;
    for (const auto& e : fs::directory_iterator(data_dir_ / "runs")) {
        const auto parts = split_run_id(e.path().filename().string());
        if (parts && parts->first == id) runs.emplace_back(parts->second, e.path().filename().string());
    }
    std::sort(runs.begin(), runs.end());
    Json list = Json::array();
    for (const auto& [n, run] : runs) {
        const fs::path p = data_dir_ / "runs" / run / "run.json";
        if (fs::exists(p)) list.push_back(json_io::parse_text(read_text(p), "run"));
    }
    send_json(res, 200, Json{{"runs", list}});
}

void Service::get_run_file(httplib::Response& res, const std::string& run, const std::string& file) {
    if (!valid_id(run)) return send_error(res, 404, "unknown run '" + run + "'");
    const fs::path p = data_dir_ / "runs" / run / file;
    if (!fs::exists(p)) return send_error(res, 404, "unknown run '" + run + "'");
    res.status = 200;
    res.set_content(read_text(p), file.ends_with(".png") ? "image/png" : "application/json");
}

void Service::get_stats(httplib::Response& res, const std::string& id) {
    if (!recipe(id)) return send_error(res, 404, "unknown recipe '" + id + "'");
    std::vector<std::pair<int, Json>> reports;
    for (const auto& e : fs::directory_iterator(data_dir_ / "runs")) {
        const auto parts = split_run_id(e.path().filename().string());
        if (!parts || parts->first != id || !fs::exists(e.path() / "report.json")) continue;
        reports.emplace_back(parts->second, json_io::parse_text(read_text(e.path() / "report.json"), "report"));
    }
    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Json> docs;
    for (auto& [n, j] : reports) docs.push_back(std::move(j));
    send_json(res, 200, stats_to_json(stats_from_reports(docs)));
}

void Service::dryrun(const httplib::Request& req, httplib::Response& res, const std::string& id) {
    const auto stored = recipe(id);
    if (!stored) return send_error(res, 404, "unknown recipe '" + id + "'");
    if (!req.is_multipart_form_data() || !req.has_file("image")) {
        return send_error(res, 400, "expected multipart form with an 'image' file");
    }
    RecipeDocument doc = stored->doc;
    try {
        if (req.has_file("graph")) {
            doc.graph = parse_graph(json_io::parse_text(req.get_file_value("graph").content, "graph"), "graph");
        }
        if (req.has_file("tolerances")) {
            Json wrapped = recipe_to_json(doc);
            wrapped["tolerances"] = json_io::parse_text(req.get_file_value("tolerances").content, "tolerances");
            doc.tolerances = parse_recipe(wrapped).tolerances;
        }
    } catch (const Error& e) {
        return send_error(res, 422, e.what());
    }
    if (auto diags = check_recipe(doc); !diags.empty()) {
        return send_json(res, 422, Json{{"error", "invalid recipe"}, {"diagnostics", diagnostics_json(diags)}});
    }
    std::optional<Recipe> transient;
    try {
        if (req.has_file("graph")) {
            transient = compile_recipe(doc, stored->source);
        } else {
            transient = Recipe{doc, stored->source, stored->model};
        }
    } catch (const Error& e) {
        return send_error(res, 422, e.what());
    }
    const auto& file = req.get_file_value("image");
    Image target;
    try {
        target = decode_upload(file.content);
    } catch (const Error& e) {
        return send_error(res, 422, e.what());
    }
    const InspectionReport report = inspect(*transient, target, upload_name(file));
    send_json(res, 200, Json{{"report", report_to_json(report)},
                             {"annotations", json_io::annotations_to_json(report.annotations)}});
}

}  // namespace registra
