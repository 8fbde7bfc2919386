#include "support.hpp"

#include <registra/demo.hpp>
#include <registra/error.hpp>
#include <registra/inspection.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace registra;
using Json = nlohmann::json;

namespace {

const Recipe& demo_recipe() {
    static const Recipe r = demo::recipe();
    return r;
}

MeasurementRecord record(const std::string& name, double v, std::optional<std::string> error = std::nullopt) {
    return {{name, MeasurementKind::AngleDeg, v}, name, std::move(error)};
}

Verdict verdict_of(double v, const Tolerance& t) {
    const std::vector<MeasurementRecord> recs{record(t.measurement, v)};
    const std::vector<Tolerance> tols{t};
    return evaluate(recs, tols).overall;
}

const MeasurementResult& find(const InspectionReport& r, const std::string& name) {
    const auto it = std::find_if(r.measurements.begin(), r.measurements.end(),
                                 [&](const MeasurementResult& m) { return m.name == name; });
    REQUIRE(it != r.measurements.end());
    return *it;
}

}  // namespace

TEST_CASE("tolerance band edges") {
    const Tolerance t{"angle", 44.5, 45.5};
    CHECK(verdict_of(45.0, t) == Verdict::Pass);
    CHECK(verdict_of(45.5, t) == Verdict::Pass);
    CHECK(verdict_of(44.5, t) == Verdict::Pass);
    CHECK(verdict_of(45.51, t) == Verdict::Fail);
    CHECK(verdict_of(44.49, t) == Verdict::Fail);
    CHECK(verdict_of(std::nan(""), t) == Verdict::Fail);
}

TEST_CASE("widening a band never turns a pass into a fail") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-10, 10), w(0, 5);
    for (int k = 0; k < 2000; ++k) {
        const double v = u(rng), lo = u(rng), hi = lo + w(rng);
        const Tolerance narrow{"m", lo, hi};
        const Tolerance wide{"m", lo - w(rng), hi + w(rng)};
        if (verdict_of(v, narrow) == Verdict::Pass) REQUIRE(verdict_of(v, wide) == Verdict::Pass);
    }
}

TEST_CASE("evaluation rules") {
    const std::vector<Tolerance> tols{{"a", 0, 1}, {"b", 0, 1}};
    SUBCASE("all in band") {
        const std::vector<MeasurementRecord> recs{record("a", 0.5), record("b", 0.2), record("c", 99)};
        const Evaluation e = evaluate(recs, tols);
        CHECK(e.overall == Verdict::Pass);
        REQUIRE(e.measurements.size() == 3);
        CHECK(e.measurements[2].verdict == std::nullopt);   // not toleranced
    }
    SUBCASE("missing toleranced measurement fails") {
        const std::vector<MeasurementRecord> recs{record("a", 0.5)};
        CHECK(evaluate(recs, tols).overall == Verdict::Fail);
    }
    SUBCASE("an untoleranced error still fails") {
        const std::vector<MeasurementRecord> recs{record("a", 0.5), record("b", 0.5), record("c", std::nan(""), "boom")};
        CHECK(evaluate(recs, tols).overall == Verdict::Fail);
    }
}

TEST_CASE("recipe canonical round trip") {
    const RecipeDocument doc = demo::recipe_document();
    const std::string once = serialize_recipe(doc);
    CHECK(serialize_recipe(parse_recipe_text(once)) == once);
    CHECK(once.back() == '\n');
    CHECK(check_recipe(doc).empty());
}

TEST_CASE("recipe problems") {
    RecipeDocument doc = demo::recipe_document();
    doc.tolerances.push_back({"ghost", 0, 1});
    doc.tolerances.push_back({"angle", 2, 1});
    doc.tolerances.push_back({"width", 0, 100});
    const auto d = check_recipe(doc);
    auto has = [&](const char* code) {
        return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code; });
    };
    CHECK(has("DanglingTolerance"));
    CHECK(has("InvalidTolerance"));
    CHECK(has("DuplicateTolerance"));
    try {
        (void)compile_recipe(doc, demo::source_image());
        FAIL("compiled a recipe with a dangling tolerance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }

    Json j = recipe_to_json(demo::recipe_document());
    j["units_per_px"] = -1.0;
    CHECK_THROWS_AS((void)parse_recipe(j), Error);
    j = recipe_to_json(demo::recipe_document());
    j["extra"] = 1;
    CHECK_THROWS_AS((void)parse_recipe(j), Error);
}

TEST_CASE("inspection of the demo source, defect and noise") {
    const Recipe& r = demo_recipe();
    const InspectionReport pass = inspect(r, demo::source_image(), "source.png");
    CHECK(pass.overall == Verdict::Pass);
    CHECK(find(pass, "angle").value == doctest::Approx(60.0).epsilon(0.005));
    CHECK(find(pass, "width").value == doctest::Approx(40.0).epsilon(0.005));
    CHECK(find(pass, "blobs.count").value == 3.0);
    CHECK(pass.execution_counters.warps == 0);
    CHECK(pass.execution_counters.pixels_copied == 0);

    const InspectionReport fail = inspect(r, demo::defect_image(), "defect.png");
    CHECK(fail.overall == Verdict::Fail);
    for (const auto& m : fail.measurements) {
        if (!m.verdict) continue;
        CAPTURE(m.name);
        CHECK((*m.verdict == Verdict::Fail) == (m.name == "width"));
    }

    const InspectionReport reject = inspect(r, demo::noise_image(), "noise.png");
    CHECK(reject.overall == Verdict::RejectNoRegistration);
    CHECK(reject.registration_error);
    CHECK(reject.measurements.empty());
    const Json j = report_to_json(reject);
    CHECK(j["verdict"] == "REJECT-NO-REGISTRATION");
    CHECK(j["registration"].is_null());
}

TEST_CASE("reports are deterministic and free of timing") {
    const Recipe& r = demo_recipe();
    const Image target = demo::defect_image();
    const std::string a = serialize_report(inspect(r, target, "t.png"));
    const std::string b = serialize_report(inspect(r, target, "t.png"));
    CHECK(a == b);
    CHECK(a.find("_ms") == std::string::npos);
    CHECK(Json::parse(a).dump(2) + "\n" == a);
}

TEST_CASE("unit conversion, csv and io errors") {
    const Recipe& r = demo_recipe();
    const InspectionReport rep = inspect(r, demo::source_image(), "source.png");
    const Json j = report_to_json(rep);
    for (const auto& m : j["measurements"]) {
        if (m["name"] == "width") CHECK(m["value_mm"].get<double>() == doctest::Approx(m["value"].get<double>() * 0.05));
        if (m["name"] == "blobs.area") {
            CHECK(m["value_mm2"].get<double>() == doctest::Approx(m["value"].get<double>() * 0.0025));
        }
        if (m["name"] == "angle") CHECK_FALSE(m.contains("value_mm"));
    }

    CHECK(csv_header(r.doc) == "image,verdict,registration_score,angle,width,patch.mean,blobs.count,blobs.area\n");
    const std::string row = csv_row(r.doc, rep);
    CHECK(row.rfind("source.png,PASS,", 0) == 0);
    CHECK(std::count(row.begin(), row.end(), ',') == 7);

    const InspectionReport io = io_error_report(r, "missing.png", "IoFailure: cannot open");
    CHECK(io.overall == Verdict::IoError);
    CHECK(csv_row(r.doc, io) == "missing.png,IO-ERROR,,,,,,\n");
    CHECK(report_to_json(io)["io_error"] == "IoFailure: cannot open");
}

TEST_CASE("stats fold matches a direct computation") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(10.0, 2.0);
    std::vector<Json> reports;
    std::vector<double> values;
    const char* verdicts[] = {"PASS", "FAIL", "REJECT-NO-REGISTRATION", "IO-ERROR"};
    std::size_t counts[4] = {};
    for (int k = 0; k < 57; ++k) {
        const int v = static_cast<int>(rng() % 4);
        ++counts[v];
        Json r{{"verdict", verdicts[v]}, {"measurements", Json::array()}};
        if (v < 2) {
            const double x = n(rng);
            values.push_back(x);
            r["measurements"].push_back({{"name", "m"}, {"value", x}});
            r["measurements"].push_back({{"name", "broken"}, {"value", nullptr}});
        }
        reports.push_back(r);
    }
    const Stats s = stats_from_reports(reports);
    CHECK(s.total == 57);
    CHECK(s.pass == counts[0]);
    CHECK(s.fail == counts[1]);
    CHECK(s.reject == counts[2]);
    CHECK(s.io_error == counts[3]);

    double mean = 0;
    for (double x : values) mean += x;
    mean /= values.size();
    double var = 0;
    for (double x : values) var += (x - mean) * (x - mean);
    const MeasurementStats& m = s.measurements.at("m");
    CHECK(m.count == values.size());
    CHECK(m.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(m.stddev == doctest::Approx(std::sqrt(var / values.size())).epsilon(1e-12));
    CHECK(m.min == *std::min_element(values.begin(), values.end()));
    CHECK(m.max == *std::max_element(values.begin(), values.end()));
    CHECK(s.measurements.count("broken") == 0);
}

TEST_CASE("batch runs") {
    const Recipe& r = demo_recipe();
    const auto dir = testing::scratch_dir("batch");
    save_image(demo::source_image(), dir / "good.png");
    save_image(demo::defect_image(), dir / "bad.png");
    write_text(dir / "junk.png", "not an image");

    SUBCASE("identical copies have zero spread") {
        const std::vector<std::filesystem::path> paths(3, dir / "good.png");
        const BatchResult b = batch_run(r, paths, 2);
        CHECK(b.stats.total == 3);
        CHECK(b.stats.pass == 3);
        for (const auto& [name, m] : b.stats.measurements) {
            CAPTURE(name);
            CHECK(m.stddev == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
    SUBCASE("mixed set") {
        std::vector<std::filesystem::path> paths{dir / "good.png", dir / "bad.png", dir / "good.png", dir / "bad.png",
                                                 dir / "good.png"};
        const BatchResult b = batch_run(r, paths, 3);
        CHECK(b.stats.total == 5);
        CHECK(b.stats.pass == 3);
        CHECK(b.stats.fail == 2);
        CHECK(b.stats.reject == 0);
        REQUIRE(b.reports.size() == 5);
        CHECK(b.reports[1].overall == Verdict::Fail);
        CHECK(b.reports[1].image == "bad.png");
    }
    SUBCASE("unreadable and missing files") {
        std::vector<std::filesystem::path> paths{dir / "junk.png", dir / "nope.png"};
        const BatchResult b = batch_run(r, paths, 1);
        CHECK(b.stats.io_error == 2);
        CHECK(b.reports[0].overall == Verdict::IoError);
    }
    SUBCASE("empty list") {
        const BatchResult b = batch_run(r, {}, 4);
        CHECK(b.reports.empty());
        CHECK(b.stats.total == 0);
        CHECK(stats_to_json(b.stats)["total"] == 0);
    }
    std::filesystem::remove_all(dir);
}
