/**
 * @file inspection.hpp
 * @brief Recipes, tolerance evaluation, single and batch inspection, statistics
 */
#pragma once

#include <registra/flowchart.hpp>
#include <registra/raster.hpp>
#include <registra/registration.hpp>
#include <registra/tolerance.hpp>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace registra {

/// Recipe as stored on disk: everything except the decoded source pixels.
struct RecipeDocument {
    std::string id;
    int version = 1;                     ///< optimistic revision counter
    std::string source_image;            ///< path relative to the recipe file
    FlowGraph graph;
    std::vector<Tolerance> tolerances;
    std::optional<double> units_per_px;  ///< report-time conversion only
};

[[nodiscard]] RecipeDocument parse_recipe(const nlohmann::json& j);
[[nodiscard]] RecipeDocument parse_recipe_text(std::string_view text);
[[nodiscard]] nlohmann::json recipe_to_json(const RecipeDocument& doc);
[[nodiscard]] std::string serialize_recipe(const RecipeDocument& doc);

/// Graph diagnostics plus tolerance problems (DanglingTolerance, DuplicateTolerance, InvalidTolerance).
[[nodiscard]] std::vector<Diagnostic> check_recipe(const RecipeDocument& doc);

/// A loaded recipe: immutable, shareable across threads.
struct Recipe {
    RecipeDocument doc;
    Image source;
    std::shared_ptr<const RegistrationModel> model;
};

/// Validates and builds the registration model. Error(ConfigError) listing every diagnostic.
[[nodiscard]] Recipe compile_recipe(RecipeDocument doc, const Image& source);
/// Reads the JSON and the source image next to it. IoFailure / SchemaError / ConfigError.
[[nodiscard]] Recipe load_recipe(const std::filesystem::path& path);

struct MeasurementResult {
    std::string name;
    MeasurementKind kind = MeasurementKind::Score;
    std::string block;
    double value = 0.0;                  ///< NaN when the producing block failed
    std::optional<std::string> error;
    std::optional<Tolerance> tolerance;
    std::optional<Verdict> verdict;      ///< set for toleranced measurements
};

struct Evaluation {
    std::vector<MeasurementResult> measurements;
    Verdict overall = Verdict::Pass;
};

/// PASS iff every toleranced measurement is present and in band and no measurement carries an error.
[[nodiscard]] Evaluation evaluate(std::span<const MeasurementRecord> records, std::span<const Tolerance> tolerances);

struct StageTiming {
    double registration_ms = 0.0;
    double tools_ms = 0.0;
    double total_ms = 0.0;
};

struct InspectionReport {
    std::string recipe_id;
    int recipe_version = 1;
    std::string image;                        ///< file name of the target
    Verdict overall = Verdict::Fail;
    std::optional<RegistrationResult> registration;
    std::optional<std::string> registration_error;
    std::optional<std::string> io_error;
    std::vector<MeasurementResult> measurements;
    std::map<std::string, std::string> block_errors;
    std::vector<Annotation> annotations;      ///< styled by verdict
    std::optional<double> units_per_px;
    StageTiming timing;                       ///< never serialized into the canonical report
    RasterCounters execution_counters;        ///< raster activity while the graph ran
};

/// Registration failure becomes REJECT-NO-REGISTRATION, never an exception.
[[nodiscard]] InspectionReport inspect(const Recipe& recipe, const Image& target, const std::string& image_ref);

/// Report for a target that could not be read.
[[nodiscard]] InspectionReport io_error_report(const Recipe& recipe, const std::string& image_ref, const std::string& why);

/// Canonical report (sorted keys, no timing).
[[nodiscard]] nlohmann::json report_to_json(const InspectionReport& report);
[[nodiscard]] std::string serialize_report(const InspectionReport& report);

/// RGB copy of the target with the report's annotations.
[[nodiscard]] RgbImage render_overlay(const InspectionReport& report, const Image& target);

[[nodiscard]] std::string csv_header(const RecipeDocument& doc);
[[nodiscard]] std::string csv_row(const RecipeDocument& doc, const InspectionReport& report);

struct MeasurementStats {
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stddev = 0.0;   ///< population
};

struct Stats {
    std::size_t total = 0;
    std::size_t pass = 0;
    std::size_t fail = 0;
    std::size_t reject = 0;
    std::size_t io_error = 0;
    std::map<std::string, MeasurementStats> measurements;
};

/// Fold over canonical report JSON documents; finite values only.
[[nodiscard]] Stats stats_from_reports(std::span<const nlohmann::json> reports);
[[nodiscard]] Stats compute_stats(std::span<const InspectionReport> reports);
[[nodiscard]] nlohmann::json stats_to_json(const Stats& stats);

struct BatchResult {
    std::vector<InspectionReport> reports;   ///< input order
    Stats stats;
};

/// Unreadable files yield IO-ERROR reports; jobs <= 0 means hardware concurrency.
[[nodiscard]] BatchResult batch_run(const Recipe& recipe, std::span<const std::filesystem::path> images, int jobs = 1);

}  // namespace registra
