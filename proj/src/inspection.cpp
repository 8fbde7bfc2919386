/**
 * @file inspection.cpp
 * @brief Recipe loading, verdicts, reports, batch runs and statistics
 */
#include <registra/inspection.hpp>
#include <registra/error.hpp>
#include <registra/serialize.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

namespace registra {

namespace {

using json_io::Json;
namespace fs = std::filesystem;

std::string format_number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::optional<Verdict> verdict_from_string(const std::string& s) {
    for (Verdict v : {Verdict::Pass, Verdict::Fail, Verdict::RejectNoRegistration, Verdict::IoError}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Recipe documents
// ---------------------------------------------------------------------------

RecipeDocument parse_recipe(const Json& j) {
    const std::string path = "recipe";
    json_io::expect_object(j, path, {"id", "version", "source_image", "graph", "tolerances", "units_per_px"});
    RecipeDocument doc;
    doc.id = json_io::get_string(j, "id", path);
    if (doc.id.empty()) json_io::schema_error(path + ".id", "must not be empty");
    doc.version = json_io::get_int(j, "version", path, 1);
    if (doc.version < 1) json_io::schema_error(path + ".version", "must be >= 1");
    doc.source_image = json_io::get_string(j, "source_image", path);
    if (!j.contains("graph")) json_io::schema_error(path + ".graph", "missing");
    doc.graph = parse_graph(j["graph"], path + ".graph");
    if (j.contains("tolerances")) {
        const Json& tl = j["tolerances"];
        if (!tl.is_array()) json_io::schema_error(path + ".tolerances", "expected an array");
        for (std::size_t i = 0; i < tl.size(); ++i) {
            const std::string tp = path + ".tolerances[" + std::to_string(i) + "]";
            json_io::expect_object(tl[i], tp, {"measurement", "min", "max"});
            doc.tolerances.push_back({json_io::get_string(tl[i], "measurement", tp), json_io::get_number(tl[i], "min", tp),
                                      json_io::get_number(tl[i], "max", tp)});
        }
    }
    if (j.contains("units_per_px")) {
        const double u = json_io::get_number(j, "units_per_px", path);
        if (!(u > 0.0)) json_io::schema_error(path + ".units_per_px", "must be positive");
        doc.units_per_px = u;
    }
    return doc;
}

RecipeDocument parse_recipe_text(std::string_view text) { return parse_recipe(json_io::parse_text(text, "recipe")); }

Json recipe_to_json(const RecipeDocument& doc) {
    Json tols = Json::array();
    for (const auto& t : doc.tolerances) tols.push_back(Json{{"measurement", t.measurement}, {"min", t.min}, {"max", t.max}});
    Json j{{"id", doc.id},
           {"version", doc.version},
           {"source_image", doc.source_image},
           {"graph", graph_to_json(doc.graph)},
           {"tolerances", std::move(tols)}};
    if (doc.units_per_px) j["units_per_px"] = *doc.units_per_px;
    return j;
}

std::string serialize_recipe(const RecipeDocument& doc) { return json_io::canonical_dump(recipe_to_json(doc)); }

std::vector<Diagnostic> check_recipe(const RecipeDocument& doc) {
    auto out = validate(doc.graph);
    std::set<std::string> names;
    for (const auto& s : measurement_slots(doc.graph)) names.insert(s.name);
    std::set<std::string> seen;
    for (const auto& t : doc.tolerances) {
        if (!names.count(t.measurement)) {
            out.push_back({"DanglingTolerance", "tolerance references unknown measurement '" + t.measurement + "'", {}});
        }
        if (!seen.insert(t.measurement).second) {
            out.push_back({"DuplicateTolerance", "measurement '" + t.measurement + "' has more than one tolerance", {}});
        }
        if (!(t.min <= t.max)) {
            out.push_back({"InvalidTolerance", "tolerance for '" + t.measurement + "' has min > max", {}});
        }
    }
    return out;
}

Recipe compile_recipe(RecipeDocument doc, const Image& source) {
    const auto diags = check_recipe(doc);
    if (!diags.empty()) {
        std::string msg;
        for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + d.code + ": " + d.message;
        throw Error(ErrorCode::ConfigError, msg);
    }
    const BlockSpec* reg = nullptr;
    for (const auto& b : doc.graph.blocks) {
        if (b.kind == BlockKind::Registration) reg = &b;
    }
    auto model = std::make_shared<const RegistrationModel>(
        RegistrationModel::build(source, *reg->roi, std::get<RegistrationParams>(reg->params).search));
    return Recipe{std::move(doc), source, std::move(model)};
}

Recipe load_recipe(const fs::path& path) {
    const auto bytes = read_file(path);
    RecipeDocument doc = parse_recipe_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    const fs::path image = path.parent_path() / doc.source_image;
    return compile_recipe(std::move(doc), load_image(image));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Evaluation evaluate(std::span<const MeasurementRecord> records, std::span<const Tolerance> tolerances) {
    Evaluation ev;
    bool ok = true;
    std::set<std::string> produced;
    for (const auto& r : records) {
        MeasurementResult m{r.measurement.name, r.measurement.kind, r.block, r.measurement.value, r.error, std::nullopt, std::nullopt};
        if (r.error) ok = false;
        const auto t = std::find_if(tolerances.begin(), tolerances.end(),
                                    [&](const Tolerance& x) { return x.measurement == m.name; });
        if (t != tolerances.end()) {
            m.tolerance = *t;
            m.verdict = !m.error && in_band(m.value, *t) ? Verdict::Pass : Verdict::Fail;
            if (*m.verdict == Verdict::Fail) ok = false;
        }
        produced.insert(m.name);
        ev.measurements.push_back(std::move(m));
    }
    for (const auto& t : tolerances) {
        if (!produced.count(t.measurement)) ok = false;
    }
    ev.overall = ok ? Verdict::Pass : Verdict::Fail;
    return ev;
}

// ---------------------------------------------------------------------------
// Inspection
// ---------------------------------------------------------------------------

InspectionReport inspect(const Recipe& recipe, const Image& target, const std::string& image_ref) {
    const auto t0 = std::chrono::steady_clock::now();
    InspectionReport report;
    report.recipe_id = recipe.doc.id;
    report.recipe_version = recipe.doc.version;
    report.image = image_ref;
    report.units_per_px = recipe.doc.units_per_px;

    ExecutionAssets assets{model_registrar(*recipe.model), recipe.doc.tolerances};
    const RasterCounters before = raster_counters();
    ExecutionResult ex = execute(recipe.doc.graph, target, assets);
    const RasterCounters after = raster_counters();
    report.execution_counters = {after.images_allocated - before.images_allocated,
                                 after.pixels_allocated - before.pixels_allocated,
                                 after.pixels_copied - before.pixels_copied,
                                 after.warps - before.warps,
                                 after.decimated_pixels - before.decimated_pixels,
                                 after.rgb_renders - before.rgb_renders,
                                 after.rgb_pixels - before.rgb_pixels};

    report.timing.registration_ms = ex.registration_ms;
    report.timing.tools_ms = ex.tools_ms;
    report.block_errors = ex.block_errors;
    report.annotations = std::move(ex.annotations);

    if (ex.registration_error) {
        report.overall = Verdict::RejectNoRegistration;
        report.registration_error = ex.registration_error;
        report.annotations.clear();
    } else {
        report.registration = ex.registration;
        Evaluation ev = evaluate(ex.measurements, recipe.doc.tolerances);
        report.overall = ev.overall;
        report.measurements = std::move(ev.measurements);

        std::map<std::string, AnnotationStyle> block_style;
        for (const auto& m : report.measurements) {
            if (!m.verdict) continue;
            auto& s = block_style.try_emplace(m.block, AnnotationStyle::Pass).first->second;
            if (*m.verdict != Verdict::Pass) s = AnnotationStyle::Fail;
        }
        for (auto& a : report.annotations) {
            if (report.block_errors.count(a.block)) {
                a.style = AnnotationStyle::Fail;
            } else if (auto it = block_style.find(a.block); it != block_style.end()) {
                a.style = it->second;
            }
        }
    }
    report.annotations.push_back({LabelShape{std::string(to_string(report.overall)), {4.0, 4.0}},
                                  identity(),
                                  report.overall == Verdict::Pass ? AnnotationStyle::Pass : AnnotationStyle::Fail,
                                  ""});
    report.timing.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

InspectionReport io_error_report(const Recipe& recipe, const std::string& image_ref, const std::string& why) {
    InspectionReport report;
    report.recipe_id = recipe.doc.id;
    report.recipe_version = recipe.doc.version;
    report.image = image_ref;
    report.overall = Verdict::IoError;
    report.io_error = why;
    report.units_per_px = recipe.doc.units_per_px;
    return report;
}

Json report_to_json(const InspectionReport& report) {
    Json j{{"recipe", report.recipe_id},
           {"recipe_version", report.recipe_version},
           {"image", report.image},
           {"verdict", std::string(to_string(report.overall))},
           {"registration", nullptr}};
    if (report.registration) {
        const Similarity s = decompose(report.registration->transform);
        j["registration"] = Json{{"score", report.registration->score},
                                 {"tx", s.tx},
                                 {"ty", s.ty},
                                 {"theta_deg", s.theta_deg},
                                 {"scale", s.scale},
                                 {"transform", json_io::to_json(report.registration->transform)}};
    }
    if (report.registration_error) j["registration_error"] = *report.registration_error;
    if (report.io_error) j["io_error"] = *report.io_error;
    Json ms = Json::array();
    for (const auto& m : report.measurements) {
        Json jm{{"name", m.name}, {"kind", std::string(to_string(m.kind))}, {"block", m.block}, {"value", number_or_null(m.value)}};
        if (m.error) jm["error"] = *m.error;
        if (m.tolerance) {
            jm["min"] = m.tolerance->min;
            jm["max"] = m.tolerance->max;
        }
        if (m.verdict) jm["verdict"] = std::string(to_string(*m.verdict));
        if (report.units_per_px && std::isfinite(m.value)) {
            const double u = *report.units_per_px;
            if (m.kind == MeasurementKind::DistancePx) jm["value_mm"] = m.value * u;
            if (m.kind == MeasurementKind::BlobAreaPx2) jm["value_mm2"] = m.value * u * u;
        }
        ms.push_back(std::move(jm));
    }
    j["measurements"] = std::move(ms);
    Json errs = Json::object();
    for (const auto& [block, why] : report.block_errors) errs[block] = why;
    j["block_errors"] = std::move(errs);
    if (report.units_per_px) j["units_per_px"] = *report.units_per_px;
    return j;
}

std::string serialize_report(const InspectionReport& report) { return json_io::canonical_dump(report_to_json(report)); }

RgbImage render_overlay(const InspectionReport& report, const Image& target) { return render(target, report.annotations); }

std::string csv_header(const RecipeDocument& doc) {
    std::string line = "image,verdict,registration_score";
    for (const auto& t : doc.tolerances) line += "," + csv_field(t.measurement);
    return line + "\n";
}

std::string csv_row(const RecipeDocument& doc, const InspectionReport& report) {
    std::string line = csv_field(report.image) + "," + std::string(to_string(report.overall)) + ",";
    if (report.registration) line += format_number(report.registration->score);
    for (const auto& t : doc.tolerances) {
        line += ",";
        const auto it = std::find_if(report.measurements.begin(), report.measurements.end(),
                                     [&](const MeasurementResult& m) { return m.name == t.measurement; });
        if (it != report.measurements.end()) line += format_number(it->value);
    }
    return line + "\n";
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

Stats stats_from_reports(std::span<const Json> reports) {
    Stats st;
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : reports) {
        ++st.total;
        const auto v = verdict_from_string(r.value("verdict", ""));
        if (v == Verdict::Pass) ++st.pass;
        else if (v == Verdict::RejectNoRegistration) ++st.reject;
        else if (v == Verdict::IoError) ++st.io_error;
        else ++st.fail;
        if (!r.contains("measurements")) continue;
        for (const auto& m : r["measurements"]) {
            if (m["value"].is_number()) values[m["name"].get<std::string>()].push_back(m["value"].get<double>());
        }
    }
    for (const auto& [name, vs] : values) {
        MeasurementStats ms;
        ms.count = vs.size();
        ms.min = *std::min_element(vs.begin(), vs.end());
        ms.max = *std::max_element(vs.begin(), vs.end());
        double sum = 0.0;
        for (double x : vs) sum += x;
        ms.mean = sum / static_cast<double>(vs.size());
        double ss = 0.0;
        for (double x : vs) ss += (x - ms.mean) * (x - ms.mean);
        ms.stddev = std::sqrt(ss / static_cast<double>(vs.size()));
        st.measurements[name] = ms;
    }
    return st;
}

Stats compute_stats(std::span<const InspectionReport> reports) {
    std::vector<Json> docs;
    docs.reserve(reports.size());
    for (const auto& r : reports) docs.push_back(report_to_json(r));
    return stats_from_reports(docs);
}

Json stats_to_json(const Stats& stats) {
    Json ms = Json::object();
    for (const auto& [name, m] : stats.measurements) {
        ms[name] = Json{{"count", m.count}, {"mean", m.mean}, {"min", m.min}, {"max", m.max}, {"stddev", m.stddev}};
    }
    return Json{{"total", stats.total},   {"pass", stats.pass},         {"fail", stats.fail},
                {"reject", stats.reject}, {"io_error", stats.io_error}, {"measurements", std::move(ms)}};
}

// ---------------------------------------------------------------------------
// Batch
// ---------------------------------------------------------------------------

BatchResult batch_run(const Recipe& recipe, std::span<const fs::path> images, int jobs) {
    BatchResult out;
    out.reports.resize(images.size());
    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(1, images.size())));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < images.size(); i = next++) {
            const std::string ref = images[i].filename().string();
            std::optional<Image> target;
            try {
                target = load_image(images[i]);
            } catch (const Error& e) {
                out.reports[i] = io_error_report(recipe, ref, e.what());
                continue;
            }
            out.reports[i] = inspect(recipe, *target, ref);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    }
    out.stats = compute_stats(out.reports);
    return out;
}

}  // namespace registra
