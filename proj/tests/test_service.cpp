#include "support.hpp"

#include <registra/demo.hpp>
#include <registra/serialize.hpp>
#include <registra/service.hpp>

#include <doctest.h>

#include <thread>

using namespace registra;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string bytes_of(const std::vector<std::uint8_t>& b) { return {b.begin(), b.end()}; }

struct Server {
    explicit Server(const fs::path& dir) : service(dir) {
        service.mount(http);
        port = http.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { http.listen_after_bind(); });
        while (!http.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    ~Server() {
        http.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(60, 0);
        return c;
    }

    Service service;
    httplib::Server http;
    int port = 0;
    std::thread thread;
};

// Every file under the data directory with its contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = bytes_of(read_file(e.path()));
    }
    return out;
}

httplib::MultipartFormDataItems recipe_form(const RecipeDocument& doc, bool with_source = true) {
    httplib::MultipartFormDataItems items{{"recipe", serialize_recipe(doc), "recipe.json", "application/json"}};
    if (with_source) items.push_back({"source", bytes_of(encode_png(demo::source_image())), "source.png", "image/png"});
    return items;
}

httplib::MultipartFormDataItems image_form(const Image& img, const std::string& name) {
    return {{"image", bytes_of(encode_png(img)), name, "image/png"}};
}

}  // namespace

TEST_CASE("service end to end") {
    const fs::path dir = testing::scratch_dir("service");
    Server server(dir);
    auto cli = server.client();

    RecipeDocument doc = demo::recipe_document();

    // Create, replace, conflict.
    auto res = cli.Put("/recipes/demo", recipe_form(doc));
    REQUIRE(res);
    CHECK(res->status == 201);
    CHECK(Json::parse(res->body)["version"] == 1);

    res = cli.Put("/recipes/demo", recipe_form(doc, false));
    CHECK(res->status == 409);
    CHECK(Json::parse(res->body)["current_version"] == 1);

    doc.version = 2;
    res = cli.Put("/recipes/demo", recipe_form(doc, false));
    CHECK(res->status == 200);
    CHECK(Json::parse(res->body)["version"] == 2);

    SUBCASE("invalid recipes are rejected with diagnostics") {
        RecipeDocument bad = demo::recipe_document();
        bad.id = "bad";
        bad.graph.connections.push_back({{"angle", "value"}, {"angle_ok", "value"}});
        res = cli.Put("/recipes/bad", recipe_form(bad));
        CHECK(res->status == 422);
        CHECK(Json::parse(res->body)["diagnostics"][0]["code"] == "MultipleConnections");

        // Cycle: width feeds back into the angle check chain.
        RecipeDocument cyc = demo::recipe_document();
        cyc.id = "cyc";
        cyc.graph.blocks.push_back({"m1", BlockKind::MeasureAngle, MeasureAngleParams{}, {}, {}});
        cyc.graph.blocks.push_back({"m2", BlockKind::MeasureAngle, MeasureAngleParams{}, {}, {}});
        cyc.graph.connections.push_back({{"edge_a", "line"}, {"m1", "a"}});
        cyc.graph.connections.push_back({{"edge_a", "line"}, {"m2", "a"}});
        cyc.graph.connections.push_back({{"m1", "value"}, {"m2", "b"}});
        cyc.graph.connections.push_back({{"m2", "value"}, {"m1", "b"}});
        res = cli.Put("/recipes/cyc", recipe_form(cyc));
        REQUIRE(res->status == 422);
        const Json rejected = Json::parse(res->body);
        bool cycle = false;
        for (const auto& d : rejected["diagnostics"]) {
            if (d["code"] == "Cycle") {
                cycle = true;
                CHECK(d["blocks"] == Json::array({"m1", "m2"}));
            }
        }
        CHECK(cycle);

        res = cli.Put("/recipes/other", recipe_form(doc));
        CHECK(res->status == 422);   // id mismatch
        res = cli.Put("/recipes/demo", "{}", "application/json");
        CHECK(res->status == 400);
        CHECK_FALSE(fs::exists(dir / "recipes" / "bad"));
    }

    SUBCASE("read back") {
        res = cli.Get("/recipes");
        CHECK(Json::parse(res->body)["recipes"] == Json::parse(R"([{"id": "demo", "version": 2}])"));
        res = cli.Get("/recipes/demo");
        CHECK(res->status == 200);
        CHECK(parse_recipe(Json::parse(res->body)).tolerances == doc.tolerances);
        res = cli.Get("/recipes/demo/source.png");
        CHECK(res->status == 200);
        CHECK(decode_image(std::span(reinterpret_cast<const std::uint8_t*>(res->body.data()), res->body.size())).width() == 640);
    }

    SUBCASE("runs, artifacts and stats") {
        res = cli.Post("/recipes/demo/runs", image_form(demo::source_image(), "good.png"));
        REQUIRE(res->status == 200);
        const Json run = Json::parse(res->body);
        CHECK(run["id"] == "demo-1");
        CHECK(run["verdict"] == "PASS");
        CHECK(run["recipe_version"] == 2);

        res = cli.Post("/recipes/demo/runs", image_form(demo::defect_image(), "bad.png"));
        CHECK(Json::parse(res->body)["verdict"] == "FAIL");

        // Stored report is the canonical serialization, byte for byte.
        const Image quantized = decode_image(encode_png(demo::source_image()));
        const Recipe local = compile_recipe(doc, quantized);
        res = cli.Get("/runs/demo-1/report.json");
        CHECK(res->status == 200);
        CHECK(res->body == serialize_report(inspect(local, quantized, "good.png")));

        res = cli.Get("/runs/demo-1/overlay.png");
        CHECK(res->status == 200);
        CHECK(res->get_header_value("Content-Type") == "image/png");
        res = cli.Get("/runs/demo-1/annotations.json");
        CHECK(Json::parse(res->body).size() > 10);
        res = cli.Get("/runs/demo-2");
        CHECK(Json::parse(res->body)["verdict"] == "FAIL");

        res = cli.Get("/recipes/demo/runs");
        CHECK(Json::parse(res->body)["runs"].size() == 2);
        res = cli.Get("/recipes/demo/stats");
        const Json stats = Json::parse(res->body);
        CHECK(stats["total"] == 2);
        CHECK(stats["pass"] == 1);
        CHECK(stats["fail"] == 1);

        res = cli.Post("/recipes/demo/runs", {{"image", "garbage", "x.png", "image/png"}});
        CHECK(res->status == 422);
    }

    SUBCASE("dry run changes nothing on disk") {
        const auto before = snapshot(dir);
        auto items = image_form(demo::defect_image(), "bad.png");
        res = cli.Post("/recipes/demo/dryrun", items);
        REQUIRE(res->status == 200);
        CHECK(Json::parse(res->body)["report"]["verdict"] == "FAIL");

        Json tols = Json::array();
        for (const auto& t : doc.tolerances) {
            const double max = t.measurement == "width" ? 50.0 : t.max;
            tols.push_back({{"measurement", t.measurement}, {"min", t.min}, {"max", max}});
        }
        items.push_back({"tolerances", tols.dump(), "tolerances.json", "application/json"});
        res = cli.Post("/recipes/demo/dryrun", items);
        REQUIRE(res->status == 200);
        const Json body = Json::parse(res->body);
        CHECK(body["report"]["verdict"] == "PASS");
        CHECK(body["annotations"].is_array());
        CHECK(snapshot(dir) == before);
    }

    SUBCASE("unknown ids") {
        CHECK(cli.Get("/recipes/nope")->status == 404);
        CHECK(cli.Get("/recipes/nope/runs")->status == 404);
        CHECK(cli.Get("/recipes/nope/stats")->status == 404);
        CHECK(cli.Get("/runs/demo-99/report.json")->status == 404);
        CHECK(cli.Get("/runs/..%2F..%2Fetc")->status == 404);
        CHECK(cli.Post("/recipes/nope/runs", image_form(demo::source_image(), "a.png"))->status == 404);
    }
    fs::remove_all(dir);
}

TEST_CASE("run counters survive a restart") {
    const fs::path dir = testing::scratch_dir("service_restart");
    {
        Server server(dir);
        auto cli = server.client();
        REQUIRE(cli.Put("/recipes/demo", recipe_form(demo::recipe_document()))->status == 201);
        REQUIRE(cli.Post("/recipes/demo/runs", image_form(demo::source_image(), "a.png"))->status == 200);
    }
    Server server(dir);
    auto cli = server.client();
    const auto res = cli.Post("/recipes/demo/runs", image_form(demo::source_image(), "a.png"));
    REQUIRE(res->status == 200);
    CHECK(Json::parse(res->body)["id"] == "demo-2");
    fs::remove_all(dir);
}
