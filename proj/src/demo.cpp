#include <registra/demo.hpp>
#include <registra/serialize.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace registra::demo {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;

Roi centered(Point2 c, double w, double h, double theta_deg = 0.0) {
    const double r = theta_deg * std::numbers::pi / 180.0;
    const double ox = c.x - (std::cos(r) * w * 0.5 - std::sin(r) * h * 0.5);
    const double oy = c.y - (std::sin(r) * w * 0.5 + std::cos(r) * h * 0.5);
    return make_roi({ox, oy}, w, h, theta_deg);
}

BlockSpec block(std::string id, BlockKind kind, double x, double y, std::optional<Roi> roi = std::nullopt) {
    BlockSpec b;
    b.id = std::move(id);
    b.kind = kind;
    b.params = default_params(kind);
    b.roi = roi;
    b.display = {x, y};
    return b;
}

}  // namespace

synth::Scene scene(bool defect) {
    synth::Scene s;
    s.width = kWidth;
    s.height = kHeight;
    s.background = 0.25f;
    s.texture_amplitude = 0.03;
    s.texture_seed = 11;

    s.shapes.push_back(synth::polygon({{120, 400}, {120, 150}, {224, 90}, {240, 90}, {240, 400}}, 0.75f));
    s.shapes.push_back(synth::rectangle(430, 110, defect ? 476 : 470, 330, 0.8f));
    s.shapes.push_back(synth::rectangle(300, 320, 380, 380, 0.6f));

    s.shapes.push_back(synth::rectangle(420, 350, 560, 410, 0.1f));
    s.shapes.push_back(synth::rectangle(431.5, 365.5, 455.5, 389.5, 0.8f));
    s.shapes.push_back(synth::circle({490, 380}, 12, 0.8f));
    s.shapes.push_back(synth::rectangle(524.5, 371.5, 540.5, 387.5, 0.8f));

    // Logo region.
    s.shapes.push_back(synth::circle({330, 210}, 40, 0.9f));
    s.shapes.push_back(synth::circle({330, 210}, 25, 0.2f));
    s.shapes.push_back(synth::polygon({{260, 300}, {300, 250}, {320, 300}}, 0.7f));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(250, 390), uy(150, 290), us(8, 22);
    std::uniform_real_distribution<float> uv(0.35f, 0.95f);
    for (int i = 0; i < 7; ++i) {
        const double x = ux(rng), y = uy(rng);
        s.shapes.push_back(synth::rectangle(x, y, x + us(rng), y + us(rng), uv(rng)));
    }
    return s;
}

Image source_image() { return synth::render(scene(false)); }

Image defect_image() { return synth::render(scene(true)); }

Image noise_image(std::uint64_t seed) {
    return synth::add_gaussian_noise(Image::filled(kWidth, kHeight, 0.5f), 0.2, seed);
}

RecipeDocument recipe_document(const std::string& source) {
    RecipeDocument doc;
    doc.id = "demo";
    doc.version = 1;
    doc.source_image = source;
    doc.units_per_px = 0.05;

    FlowGraph& g = doc.graph;
    g.blocks.push_back(block("in", BlockKind::Input, 0, 0));
    BlockSpec reg = block("reg", BlockKind::Registration, 200, 0, make_roi({224, 144}, 192, 192));
    std::get<RegistrationParams>(reg.params).search.pyramid_levels = 4;
    g.blocks.push_back(reg);
    g.blocks.push_back(block("edge_a", BlockKind::ExtractLine, 400, 0, centered({120, 300}, 40, 120)));
    g.blocks.push_back(block("edge_b", BlockKind::ExtractLine, 400, 120, centered({172, 120}, 40, 70, 60)));
    g.blocks.push_back(block("edge_c", BlockKind::ExtractLine, 400, 240, centered({430, 220}, 30, 120)));
    g.blocks.push_back(block("edge_d", BlockKind::ExtractLine, 400, 360, centered({470, 220}, 30, 120)));
    g.blocks.push_back(block("patch", BlockKind::MeasureIntensity, 400, 480, make_roi({310, 330}, 60, 40)));
    g.blocks.push_back(block("blobs", BlockKind::ExtractBlobs, 400, 600, make_roi({425, 355}, 130, 50)));
    g.blocks.push_back(block("angle", BlockKind::MeasureAngle, 600, 60));
    g.blocks.push_back(block("width", BlockKind::MeasureDistance, 600, 300));
    g.blocks.push_back(block("angle_ok", BlockKind::ToleranceCheck, 800, 60));
    g.blocks.push_back(block("out", BlockKind::Output, 1000, 300));

    auto link = [&](std::string fb, std::string fp, std::string tb, std::string tp) {
        g.connections.push_back({{std::move(fb), std::move(fp)}, {std::move(tb), std::move(tp)}});
    };
    link("in", "image", "reg", "image");
    for (const char* id : {"edge_a", "edge_b", "edge_c", "edge_d", "patch", "blobs"}) link("reg", "image", id, "image");
    link("edge_a", "line", "angle", "a");
    link("edge_b", "line", "angle", "b");
    link("edge_c", "line", "width", "a");
    link("edge_d", "point", "width", "b");
    link("angle", "value", "angle_ok", "value");
    link("angle_ok", "verdict", "out", "in");
    link("width", "value", "out", "in");
    link("patch", "mean", "out", "in");
    link("blobs", "count", "out", "in");
    link("blobs", "area", "out", "in");

    doc.tolerances = {
        {"angle", 59.5, 60.5},
        {"width", 39.5, 40.5},
        {"patch.mean", 0.55, 0.65},
        {"blobs.count", 3.0, 3.0},
        {"blobs.area", 540.0, 610.0},
    };
    return doc;
}

Recipe recipe() { return compile_recipe(recipe_document(), source_image()); }

Transform random_warp(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(-15.0, 15.0), ur(-8.0, 8.0), us(0.93, 1.07);
    const double tx = ut(rng), ty = ut(rng), th = ur(rng), sc = us(rng);
    return synth::similarity_about({kWidth / 2.0, kHeight / 2.0}, tx, ty, th, sc);
}

void write(const std::filesystem::path& dir, int warps) {
    std::filesystem::create_directories(dir);
    const Image src = source_image();
    save_image(src, dir / "source.png");
    write_text(dir / "recipe.json", serialize_recipe(recipe_document("source.png")));
    save_image(defect_image(), dir / "defect.png");
    save_image(noise_image(), dir / "noise.png");
    for (int i = 0; i < warps; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "warp_%02d.png", i);
        save_image(warp_similarity(src, random_warp(1000 + i), 0.0f), dir / name);
    }
}

}  // namespace registra::demo
