#include "support.hpp"

#include <registra/error.hpp>
#include <registra/synth.hpp>
#include <registra/tools.hpp>

#include <doctest.h>

#include <cmath>
#include <deque>

using namespace registra;

namespace {

Image step_scene() {
    synth::Scene s;
    s.width = 160;
    s.height = 120;
    s.background = 0.2f;
    s.shapes.push_back(synth::rectangle(50, -10, 200, 200, 0.8f));
    return synth::render(s);
}

std::vector<int> flood_fill_labels(const std::vector<std::uint8_t>& mask, int w, int h, int& count) {
    std::vector<int> labels(mask.size(), 0);
    count = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t k = static_cast<std::size_t>(y) * w + x;
            if (!mask[k] || labels[k]) continue;
            ++count;
            std::deque<std::pair<int, int>> queue{{x, y}};
            labels[k] = count;
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
                        if (mask[n] && !labels[n]) {
                            labels[n] = count;
                            queue.emplace_back(nx, ny);
                        }
                    }
                }
            }
        }
    }
    return labels;
}

ErrorCode error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvalidParams;
}

}  // namespace

TEST_CASE("caliper finds a vertical step edge") {
    const ToolContext ctx(identity(), step_scene());
    const Roi roi = make_roi({30, 20}, 40, 80);
    const LineExtraction ex = extract_line(ctx, roi, {});
    CHECK(ex.line.support == 16);
    CHECK(ex.local_edges.size() == 16);
    CHECK(ex.line.point.x == doctest::Approx(50.0).epsilon(0.002));
    CHECK(std::abs(ex.line.dir.x) < 1e-3);
    CHECK(ex.line.dir.y > 0.99);   // oriented along local +y
    CHECK(ex.line.rms_residual < 0.05);
}

TEST_CASE("caliper polarity") {
    const ToolContext ctx(identity(), step_scene());
    const Roi roi = make_roi({30, 20}, 40, 80);
    EdgeParams p;
    p.polarity = Polarity::DarkToLight;
    CHECK_NOTHROW((void)extract_line(ctx, roi, p));
    p.polarity = Polarity::LightToDark;
    CHECK(error_of([&] { (void)extract_line(ctx, roi, p); }) == ErrorCode::InsufficientEdgePoints);
    // Scanning right-to-left (ROI rotated 180 degrees) flips the polarity.
    const Roi flipped = make_roi({70, 100}, 40, 80, 180.0);
    const LineExtraction ex = extract_line(ctx, flipped, p);
    CHECK(ex.line.point.x == doctest::Approx(50.0).epsilon(0.002));
    CHECK(ex.line.dir.y < -0.99);
}

TEST_CASE("caliper reports source-frame geometry through T") {
    const Image src = step_scene();
    const Transform t = synth::similarity_about({80, 60}, 4.0, -3.0, 10.0, 1.2);
    const ToolContext ctx(t, warp_similarity(src, t, 0.2f));
    const LineExtraction ex = extract_line(ctx, make_roi({30, 30}, 40, 60), {});
    CHECK(std::abs(ex.line.point.x - 50.0) < 0.1);
    CHECK(std::abs(ex.line.dir.x) < 2e-3);
}

TEST_CASE("caliper errors") {
    const ToolContext flat(identity(), Image::filled(100, 100, 0.5f));
    CHECK(error_of([&] { (void)extract_line(flat, make_roi({10, 10}, 20, 20), {}); }) ==
          ErrorCode::InsufficientEdgePoints);
    CHECK(error_of([&] { (void)extract_line(flat, make_roi({90, 10}, 20, 20), {}); }) == ErrorCode::RoiOutsideTarget);
    EdgeParams bad;
    bad.num_scanlines = 1;
    CHECK(error_of([&] { (void)extract_line(flat, make_roi({10, 10}, 20, 20), bad); }) == ErrorCode::InvalidParams);
}

TEST_CASE("angles and distances") {
    const LineModel vertical{{0, 0}, {0, 1}};
    const LineModel diagonal{{0, 0}, {std::sqrt(0.5), std::sqrt(0.5)}};
    const LineModel anti{{0, 0}, {-std::sqrt(0.5), std::sqrt(0.5)}};
    const LineModel horizontal{{0, 0}, {1, 0}};
    CHECK(angle_between(vertical, horizontal) == doctest::Approx(90.0));
    CHECK(angle_between(vertical, diagonal) == doctest::Approx(45.0));
    CHECK(angle_between(vertical, anti) == doctest::Approx(45.0));
    CHECK(angle_between(diagonal, anti) == doctest::Approx(90.0));
    CHECK(angle_between(vertical, vertical) == doctest::Approx(0.0));
    CHECK(angle_between(vertical, anti, AngleMode::Directed) == doctest::Approx(45.0));
    CHECK(angle_between(vertical, diagonal, AngleMode::Directed) == doctest::Approx(135.0));
    CHECK(measure_angle("a", vertical, horizontal).kind == MeasurementKind::AngleDeg);

    CHECK(point_line_distance({3, 7}, vertical) == doctest::Approx(3.0));
    CHECK(measure_distance("d", Point2{0, 0}, Point2{3, 4}).value == doctest::Approx(5.0));
    CHECK(measure_distance("d", horizontal, Point2{10, -2}).value == doctest::Approx(2.0));
}

TEST_CASE("intensity statistics on the local grid") {
    std::vector<float> px(50 * 40);
    for (int y = 0; y < 40; ++y) {
        for (int x = 0; x < 50; ++x) px[y * 50 + x] = x < 25 ? 0.2f : 0.6f;
    }
    const ToolContext ctx(identity(), Image(50, 40, px));
    const IntensityStats s = measure_intensity(ctx, make_roi({20, 5}, 10, 4));
    CHECK(s.samples == 40);
    CHECK(s.mean == doctest::Approx(0.4));
    CHECK(s.min == doctest::Approx(0.2));
    CHECK(s.max == doctest::Approx(0.6));
    CHECK(error_of([&] { (void)measure_intensity(ctx, make_roi({45, 5}, 10, 4)); }) == ErrorCode::RoiOutsideTarget);
}

TEST_CASE("labeling matches a flood-fill oracle on 100 random 32x32 binaries") {
    std::mt19937_64 rng(31337);
    for (int k = 0; k < 100; ++k) {
        CAPTURE(k);
        std::bernoulli_distribution bit(0.2 + 0.005 * k);
        std::vector<std::uint8_t> mask(32 * 32);
        for (auto& m : mask) m = bit(rng);
        int count = 0, oracle_count = 0;
        const auto labels = label_components(mask, 32, 32, count);
        const auto oracle = flood_fill_labels(mask, 32, 32, oracle_count);
        REQUIRE(count == oracle_count);
        REQUIRE(labels == oracle);
    }
}

TEST_CASE("labeling examples") {
    int count = 0;
    // Diagonal neighbors join under 8-connectivity.
    CHECK(label_components({1, 0, 0, 1}, 2, 2, count) == std::vector<int>{1, 0, 0, 1});
    CHECK(count == 1);
    (void)label_components({0, 0, 0, 0}, 2, 2, count);
    CHECK(count == 0);
    // U shape: two arms merge at the bottom row.
    const auto u = label_components({1, 0, 1, 1, 0, 1, 1, 1, 1}, 3, 3, count);
    CHECK(count == 1);
    CHECK(u[2] == 1);
}

TEST_CASE("blob extraction on rendered shapes") {
    synth::Scene s;
    s.width = 120;
    s.height = 80;
    s.background = 0.1f;
    s.shapes.push_back(synth::rectangle(9.5, 9.5, 29.5, 29.5, 0.9f));   // 20x20
    s.shapes.push_back(synth::rectangle(49.5, 19.5, 59.5, 29.5, 0.9f)); // 10x10
    s.shapes.push_back(synth::rectangle(79.5, -5, 90.5, 40, 0.9f));     // touches the ROI border
    const Image img = synth::render(s);
    const ToolContext ctx(identity(), img);
    const Roi roi = make_roi({0, 0}, 100, 40);
    const auto blobs = extract_blobs(ctx, roi, {});
    REQUIRE(blobs.size() == 3);
    // Linear crossings cut each convex corner by 0.125 px^2; the bar loses half a row at each ROI edge.
    CHECK(blobs[0].area == doctest::Approx(429.0));
    CHECK(blobs[0].touches_border);
    CHECK(blobs[1].area == doctest::Approx(399.5));
    CHECK(blobs[1].centroid.x == doctest::Approx(19.5));
    CHECK(blobs[1].centroid.y == doctest::Approx(19.5));
    CHECK(blobs[2].area == doctest::Approx(99.5));

    BlobParams p;
    p.exclude_border = true;
    CHECK(extract_blobs(ctx, roi, p).size() == 2);
    p.polarity = BlobPolarity::Dark;
    p.exclude_border = false;
    CHECK(extract_blobs(ctx, roi, p).size() == 2);   // the full-height bar splits the background
    p.threshold = 1.5;
    CHECK(error_of([&] { (void)extract_blobs(ctx, roi, p); }) == ErrorCode::InvalidParams);
}

TEST_CASE("blob area is reported in source pixels under a scaled T") {
    synth::Scene s;
    s.width = 100;
    s.height = 100;
    s.background = 0.1f;
    s.shapes.push_back(synth::rectangle(29.5, 29.5, 49.5, 49.5, 0.9f));
    const Image src = synth::render(s);
    const ToolContext ref(identity(), src);
    const Transform t = from_similarity(-10.0, -5.0, 0.0, 1.5);
    const ToolContext warped(t, warp_similarity(src, t, 0.1f));
    const Roi roi = make_roi({20, 20}, 40, 40);
    const auto a = extract_blobs(ref, roi, {});
    const auto b = extract_blobs(warped, roi, {});
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(a[0].area == doctest::Approx(399.5));
    CHECK(std::abs(b[0].area - 399.5) <= 4.0);
    CHECK(b[0].centroid.x == doctest::Approx(39.5).epsilon(0.01));
}
