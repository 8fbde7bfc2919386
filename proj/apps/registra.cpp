/**
 * @file registra.cpp
 * @brief Command-line front end
 *
 * Exit codes: 0 pass/success, 1 fail, 2 reject (no registration),
 * 3 config or schema error, 4 I/O error.
 */
#include <registra/demo.hpp>
#include <registra/error.hpp>
#include <registra/inspection.hpp>
#include <registra/serialize.hpp>
#include <registra/synth.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace registra;

namespace {

enum Exit { kOk = 0, kFail = 1, kReject = 2, kConfig = 3, kIo = 4 };

int exit_for(Verdict v) {
    switch (v) {
        case Verdict::Pass: return kOk;
        case Verdict::Fail: return kFail;
        case Verdict::RejectNoRegistration: return kReject;
        case Verdict::IoError: return kIo;
    }
    return kFail;
}

int exit_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::IoFailure:
        case ErrorCode::UnsupportedFormat:
        case ErrorCode::CorruptFile: return kIo;
        case ErrorCode::RegistrationFailed: return kReject;
        default: return kConfig;
    }
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("registra");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("REGISTRA_LOG");
    // Unknown names map to "off".
    spdlog::set_level(spdlog::level::from_str(env ? env : "error"));
}

std::string read_text(const fs::path& p) {
    const auto bytes = read_file(p);
    return {bytes.begin(), bytes.end()};
}

void print_diagnostics(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) {
        std::string ids;
        for (const auto& b : d.blocks) ids += (ids.empty() ? "" : ",") + b;
        std::cerr << d.code << ": " << d.message;
        if (!ids.empty()) std::cerr << " [" << ids << "]";
        std::cerr << "\n";
    }
}

std::vector<fs::path> collect_images(const std::string& dir, const std::string& list) {
    std::vector<fs::path> out;
    if (!dir.empty()) {
        if (!fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, "not a directory: " + dir);
        for (const auto& e : fs::directory_iterator(dir)) {
            auto ext = e.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            if (e.is_regular_file() && (ext == ".png" || ext == ".pgm")) out.push_back(e.path());
        }
        std::sort(out.begin(), out.end());
    } else {
        std::istringstream in(read_text(list));
        const fs::path base = fs::path(list).parent_path();
        for (std::string line; std::getline(in, line);) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            const fs::path p(line);
            out.push_back(p.is_absolute() ? p : base / p);
        }
    }
    return out;
}

int cmd_validate(const std::string& recipe_path) {
    const RecipeDocument doc = parse_recipe_text(read_text(recipe_path));
    const auto diags = check_recipe(doc);
    if (!diags.empty()) {
        print_diagnostics(diags);
        return kConfig;
    }
    const Recipe r = compile_recipe(doc, load_image(fs::path(recipe_path).parent_path() / doc.source_image));
    std::cout << "ok: " << r.doc.id << " (" << r.doc.graph.blocks.size() << " blocks, " << r.doc.tolerances.size()
              << " tolerances)\n";
    return kOk;
}

int cmd_inspect(const std::string& recipe_path, const std::string& image_path, const std::string& report_path,
                const std::string& overlay_path, bool csv) {
    const Recipe recipe = load_recipe(recipe_path);
    const fs::path image(image_path);
    InspectionReport report;
    std::optional<Image> target;
    try {
        target = load_image(image);
        report = inspect(recipe, *target, image.filename().string());
    } catch (const Error& e) {
        if (exit_for(e) != kIo) throw;
        report = io_error_report(recipe, image.filename().string(), e.what());
    }
    spdlog::info("{}: {} (registration {:.1f} ms, tools {:.1f} ms, total {:.1f} ms)", report.image,
                 to_string(report.overall), report.timing.registration_ms, report.timing.tools_ms,
                 report.timing.total_ms);
    const std::string text = serialize_report(report);
    if (!report_path.empty()) write_text(report_path, text);
    if (!overlay_path.empty() && target) save_png(render_overlay(report, *target), overlay_path);
    if (csv) {
        std::cout << csv_header(recipe.doc) << csv_row(recipe.doc, report);
    } else if (report_path.empty()) {
        std::cout << text;
    }
    if (report.io_error) std::cerr << *report.io_error << "\n";
    return exit_for(report.overall);
}

int cmd_batch(const std::string& recipe_path, const std::string& dir, const std::string& list,
              const std::string& csv_path, int jobs, const std::string& reports_dir) {
    const Recipe recipe = load_recipe(recipe_path);
    const auto images = collect_images(dir, list);
    const BatchResult res = batch_run(recipe, images, jobs);
    std::string csv = csv_header(recipe.doc);
    for (const auto& r : res.reports) csv += csv_row(recipe.doc, r);
    write_text(csv_path, csv);
    if (!reports_dir.empty()) {
        fs::create_directories(reports_dir);
        for (const auto& r : res.reports) write_text(fs::path(reports_dir) / (fs::path(r.image).stem().string() + ".json"), serialize_report(r));
    }
    std::cout << "total " << res.stats.total << " pass " << res.stats.pass << " fail " << res.stats.fail << " reject "
              << res.stats.reject << " io_error " << res.stats.io_error << "\n";
    std::cout << json_io::canonical_dump(stats_to_json(res.stats));
    return res.stats.pass == res.stats.total ? kOk : kFail;
}

int cmd_synth(const std::string& image_path, double tx, double ty, double theta, double scale, double noise,
              std::uint64_t seed, const std::string& out) {
    const Image src = load_image(image_path);
    const Transform t = from_similarity(tx, ty, theta, scale);
    Image target = warp_similarity(src, t, 0.0f);
    if (noise > 0.0) target = synth::add_gaussian_noise(target, noise, seed);
    save_image(target, out);
    return kOk;
}

int cmd_register(const std::string& recipe_path, const std::string& image_path) {
    const Recipe recipe = load_recipe(recipe_path);
    const Image target = load_image(image_path);
    const RegistrationResult r = register_target(*recipe.model, target);
    const Similarity s = decompose(r.transform);
    std::cout << json_io::canonical_dump(json_io::Json{
        {"score", r.score}, {"tx", s.tx}, {"ty", s.ty}, {"theta_deg", s.theta_deg}, {"scale", s.scale}});
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"registra: acquire-register-analyze inspection engine"};
    app.require_subcommand(1);

    std::string recipe, image, report, overlay, dir, list, csv_out, out, reports_dir;
    bool csv = false;
    int jobs = 1, warps = 0;
    double tx = 0, ty = 0, theta = 0, scale = 1, noise = 0;
    std::uint64_t seed = 1;

    auto* validate_cmd = app.add_subcommand("validate", "check a recipe and print flowchart diagnostics");
    validate_cmd->add_option("--recipe", recipe, "recipe JSON")->required();

    auto* inspect_cmd = app.add_subcommand("inspect", "inspect one target image");
    inspect_cmd->add_option("--recipe", recipe, "recipe JSON")->required();
    inspect_cmd->add_option("--image", image, "target image")->required();
    inspect_cmd->add_option("--report", report, "write the report JSON here instead of stdout");
    inspect_cmd->add_option("--overlay", overlay, "write the overlay PNG here");
    inspect_cmd->add_flag("--csv", csv, "print a CSV header and row instead of the report");

    auto* batch_cmd = app.add_subcommand("batch", "inspect a set of images");
    batch_cmd->add_option("--recipe", recipe, "recipe JSON")->required();
    auto* dir_opt = batch_cmd->add_option("--dir", dir, "directory of .png/.pgm targets");
    auto* list_opt = batch_cmd->add_option("--list", list, "file with one image path per line");
    dir_opt->excludes(list_opt);
    batch_cmd->add_option("--csv", csv_out, "CSV output")->required();
    batch_cmd->add_option("--jobs", jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    batch_cmd->add_option("--reports", reports_dir, "also write one report JSON per image here");

    auto* synth_cmd = app.add_subcommand("synth", "warp an image by a similarity to make a target");
    synth_cmd->add_option("--image", image, "source image")->required();
    synth_cmd->add_option("--tx", tx, "translation x (px)");
    synth_cmd->add_option("--ty", ty, "translation y (px)");
    synth_cmd->add_option("--theta", theta, "rotation (deg)");
    synth_cmd->add_option("--scale", scale, "scale factor");
    synth_cmd->add_option("--noise", noise, "gaussian noise sigma")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--seed", seed, "noise seed");
    synth_cmd->add_option("--out", out, "output image")->required();

    auto* register_cmd = app.add_subcommand("register", "run only the registration block");
    register_cmd->add_option("--recipe", recipe, "recipe JSON")->required();
    register_cmd->add_option("--image", image, "target image")->required();

    auto* demo_cmd = app.add_subcommand("demo", "write the demo part, recipe and sample targets");
    demo_cmd->add_option("--out", out, "output directory")->required();
    demo_cmd->add_option("--warps", warps, "number of randomly warped targets")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*validate_cmd) return cmd_validate(recipe);
        if (*inspect_cmd) return cmd_inspect(recipe, image, report, overlay, csv);
        if (*batch_cmd) {
            if (dir.empty() && list.empty()) {
                std::cerr << "batch needs --dir or --list\n";
                return kConfig;
            }
            return cmd_batch(recipe, dir, list, csv_out, jobs, reports_dir);
        }
        if (*synth_cmd) return cmd_synth(image, tx, ty, theta, scale, noise, seed, out);
        if (*register_cmd) return cmd_register(recipe, image);
        if (*demo_cmd) {
            demo::write(out, warps);
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kConfig;
    }
    return kOk;
}
