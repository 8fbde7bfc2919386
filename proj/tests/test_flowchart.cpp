#include "support.hpp"

#include <registra/error.hpp>
#include <registra/flowchart.hpp>
#include <registra/synth.hpp>

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace registra;
using Json = nlohmann::json;

namespace {

Json block(const std::string& id, const std::string& kind, std::optional<std::array<double, 4>> roi = std::nullopt) {
    Json b{{"id", id}, {"kind", kind}};
    if (roi) b["roi"] = Json{{"origin", {(*roi)[0], (*roi)[1]}}, {"width", (*roi)[2]}, {"height", (*roi)[3]}};
    return b;
}

Json link(const std::string& fb, const std::string& fp, const std::string& tb, const std::string& tp) {
    return Json{{"from", {fb, fp}}, {"to", {tb, tp}}};
}

// in -> reg -> {edge, flat, patch}; flat feeds dist, which fails upstream.
Json small_graph() {
    Json g;
    g["blocks"] = Json::array({
        block("in", "input"),
        block("reg", "registration", std::array<double, 4>{10, 10, 60, 60}),
        block("edge", "extract_line", std::array<double, 4>{30, 20, 40, 80}),
        block("flat", "extract_line", std::array<double, 4>{100, 20, 40, 40}),
        block("patch", "measure_intensity", std::array<double, 4>{60, 30, 30, 30}),
        block("dist", "measure_distance"),
        block("check", "tolerance_check"),
        block("out", "output"),
    });
    g["connections"] = Json::array({
        link("in", "image", "reg", "image"),
        link("reg", "image", "edge", "image"),
        link("reg", "image", "flat", "image"),
        link("reg", "image", "patch", "image"),
        link("flat", "line", "dist", "a"),
        link("edge", "point", "dist", "b"),
        link("patch", "mean", "check", "value"),
        link("check", "verdict", "out", "in"),
        link("dist", "value", "out", "in"),
    });
    return g;
}

Image small_target() {
    synth::Scene s;
    s.width = 160;
    s.height = 120;
    s.background = 0.2f;
    s.shapes.push_back(synth::rectangle(50, -10, 90, 200, 0.8f));
    return synth::render(s);
}

std::string error_text(auto&& fn, ErrorCode expected) {
    try {
        fn();
    } catch (const Error& e) {
        CHECK(e.code() == expected);
        return e.what();
    }
    FAIL("no error raised");
    return {};
}

bool has_code(const std::vector<Diagnostic>& d, const std::string& code) {
    return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code; });
}

const Diagnostic& find_code(const std::vector<Diagnostic>& d, const std::string& code) {
    const auto it = std::find_if(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code; });
    REQUIRE(it != d.end());
    return *it;
}

// Every edge u -> v (data or implicit) must have u before v.
bool respects_edges(const FlowGraph& g, const std::vector<std::string>& order) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    if (pos.size() != g.blocks.size() || order.size() != g.blocks.size()) return false;
    for (const auto& c : g.connections) {
        if (pos.at(c.from.block) >= pos.at(c.to.block)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("parse errors carry a path") {
    Json g = small_graph();
    g["blocks"][2]["colour"] = "red";
    CHECK(error_text([&] { (void)parse_graph(g); }, ErrorCode::SchemaError).find("graph.blocks[2].colour") !=
          std::string::npos);

    g = small_graph();
    g["blocks"][1]["kind"] = "teleport";
    CHECK(error_text([&] { (void)parse_graph(g); }, ErrorCode::UnknownKind).find("graph.blocks[1].kind") !=
          std::string::npos);

    g = small_graph();
    g["blocks"][3]["id"] = "edge";
    (void)error_text([&] { (void)parse_graph(g); }, ErrorCode::DuplicateId);

    g = small_graph();
    g["connections"][4]["from"] = {"ghost", "line"};
    CHECK(error_text([&] { (void)parse_graph(g); }, ErrorCode::SchemaError).find("graph.connections[4].from") !=
          std::string::npos);

    g = small_graph();
    g["connections"][4]["to"] = {"dist", "c"};
    (void)error_text([&] { (void)parse_graph(g); }, ErrorCode::SchemaError);

    g = small_graph();
    g["blocks"][2]["params"] = Json{{"num_scanlines", "many"}};
    CHECK(error_text([&] { (void)parse_graph(g); }, ErrorCode::SchemaError).find("graph.blocks[2].params") !=
          std::string::npos);

    (void)error_text([] { (void)parse_graph(std::string_view("{not json")); }, ErrorCode::SchemaError);
}

TEST_CASE("serialize is a fixpoint of parse") {
    const FlowGraph g = parse_graph(small_graph());
    const std::string once = serialize(g);
    const std::string twice = serialize(parse_graph(std::string_view(once)));
    CHECK(once == twice);
    // Defaults are filled in.
    CHECK(once.find("\"num_scanlines\": 16") != std::string::npos);
}

TEST_CASE("valid graph has no diagnostics") {
    CHECK(validate(parse_graph(small_graph())).empty());
}

TEST_CASE("diagnostics") {
    SUBCASE("cycle names its members") {
        Json g = small_graph();
        g["blocks"].push_back(block("a1", "measure_angle"));
        g["blocks"].push_back(block("a2", "measure_angle"));
        g["connections"].push_back(link("a1", "value", "a2", "a"));
        g["connections"].push_back(link("a2", "value", "a1", "a"));
        g["connections"].push_back(link("edge", "line", "a1", "b"));
        g["connections"].push_back(link("edge", "line", "a2", "b"));
        const auto d = validate(parse_graph(g));
        const Diagnostic& c = find_code(d, "Cycle");
        CHECK(c.blocks == std::vector<std::string>{"a1", "a2"});
        CHECK(c.message == "cycle through: a1, a2");
        CHECK(has_code(d, "TypeMismatch"));   // scalar into a line port
        CHECK_THROWS_AS((void)topo_order(parse_graph(g)), Error);
    }
    SUBCASE("missing registration") {
        Json g = small_graph();
        g["blocks"].erase(1);
        Json conns = Json::array();
        for (const auto& c : g["connections"]) {
            if (c["from"][0] != "reg" && c["to"][0] != "reg") conns.push_back(c);
        }
        conns.push_back(link("in", "image", "edge", "image"));
        g["connections"] = conns;
        const auto d = validate(parse_graph(g));
        CHECK(has_code(d, "MissingRegistration"));
        CHECK(has_code(d, "UnconnectedPort"));   // flat and patch lost their image
    }
    SUBCASE("type mismatch") {
        Json g = small_graph();
        g["connections"][5] = link("edge", "line", "dist", "b");   // line into a point-only port
        const auto d = validate(parse_graph(g));
        const Diagnostic& t = find_code(d, "TypeMismatch");
        CHECK(t.blocks == std::vector<std::string>{"dist", "edge"});
    }
    SUBCASE("unreachable and missing roi") {
        Json g = small_graph();
        g["blocks"].push_back(block("lonely", "measure_intensity"));
        const auto d = validate(parse_graph(g));
        CHECK(find_code(d, "Unreachable").blocks == std::vector<std::string>{"lonely"});
        CHECK(find_code(d, "MissingRoi").blocks == std::vector<std::string>{"lonely"});
        CHECK(has_code(d, "UnconnectedPort"));
    }
    SUBCASE("multiple connections on a single port") {
        Json g = small_graph();
        g["connections"].push_back(link("edge", "point", "dist", "b"));
        CHECK(has_code(validate(parse_graph(g)), "MultipleConnections"));
    }
    SUBCASE("rotated template") {
        Json g = small_graph();
        g["blocks"][1]["roi"]["theta_deg"] = 10.0;
        CHECK(has_code(validate(parse_graph(g)), "InvalidTemplateRoi"));
    }
    SUBCASE("no output path") {
        Json g = small_graph();
        g["connections"].erase(8);
        g["connections"].erase(7);
        const auto d = validate(parse_graph(g));
        CHECK(has_code(d, "NoOutputPath"));
    }
}

TEST_CASE("diamond topological order") {
    Json g;
    g["blocks"] = Json::array({block("out", "output"), block("c", "measure_angle"),
                               block("b", "extract_line", std::array<double, 4>{0, 0, 10, 10}),
                               block("a", "extract_line", std::array<double, 4>{0, 0, 10, 10}),
                               block("reg", "registration", std::array<double, 4>{0, 0, 10, 10}), block("in", "input")});
    g["connections"] = Json::array({link("in", "image", "reg", "image"), link("reg", "image", "a", "image"),
                                    link("reg", "image", "b", "image"), link("a", "line", "c", "a"),
                                    link("b", "line", "c", "b"), link("c", "value", "out", "in")});
    CHECK(topo_order(parse_graph(g)) == std::vector<std::string>{"in", "reg", "a", "b", "c", "out"});
}

TEST_CASE("random DAG orders respect every edge and ignore declaration order") {
    std::mt19937_64 rng(99);
    for (int k = 0; k < 100; ++k) {
        CAPTURE(k);
        const int n = 2 + static_cast<int>(rng() % 30);
        // Hidden rank decides edge direction; ids are unrelated to rank.
        std::vector<int> rank(n);
        std::iota(rank.begin(), rank.end(), 0);
        std::shuffle(rank.begin(), rank.end(), rng);
        FlowGraph g;
        for (int i = 0; i < n; ++i) g.blocks.push_back({"b" + std::to_string(i), BlockKind::MeasureAngle, {}, {}, {}});
        std::bernoulli_distribution edge(0.15);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (rank[i] < rank[j] && edge(rng)) g.connections.push_back({{g.blocks[i].id, "value"}, {g.blocks[j].id, "a"}});
            }
        }
        const auto order = topo_order(g);
        REQUIRE(respects_edges(g, order));

        FlowGraph shuffled = g;
        std::shuffle(shuffled.blocks.begin(), shuffled.blocks.end(), rng);
        std::shuffle(shuffled.connections.begin(), shuffled.connections.end(), rng);
        REQUIRE(topo_order(shuffled) == order);
    }
}

TEST_CASE("registration precedes every tool even without a data path") {
    FlowGraph g = parse_graph(small_graph());
    // Rename so the lexicographic tie-break alone would schedule "a_patch" first.
    for (auto& b : g.blocks) {
        if (b.id == "reg") b.id = "zz_reg";
    }
    for (auto& c : g.connections) {
        if (c.from.block == "reg") c.from.block = "zz_reg";
        if (c.to.block == "reg") c.to.block = "zz_reg";
    }
    const auto order = topo_order(g);
    const auto reg = std::find(order.begin(), order.end(), "zz_reg") - order.begin();
    CHECK(reg == 1);
}

TEST_CASE("execution with the identity registrar") {
    const FlowGraph g = parse_graph(small_graph());
    const Image target = small_target();
    const ExecutionAssets assets{identity_registrar(), {{"patch.mean", 0.7, 0.9}}};
    const ExecutionResult r = execute(g, target, assets);

    REQUIRE(r.registration);
    CHECK_FALSE(r.registration_error);
    for (const auto& [id, ctx] : r.contexts) {
        CAPTURE(id);
        CHECK(ctx.transform == identity());
        const BlockSpec& b = *g.find(id);
        if (b.roi) {
            CHECK(testing::max_abs_diff(ctx.display, roi_to_parent(*b.roi)) < 1e-12);
        } else {
            CHECK(ctx.display == identity());
        }
    }
    // flat has no edge; dist fails upstream; the other branches still run.
    CHECK(r.block_errors.count("flat") == 1);
    CHECK(r.block_errors.at("flat").find("InsufficientEdgePoints") != std::string::npos);
    CHECK(r.block_errors.at("dist").find("UpstreamFailed") != std::string::npos);
    CHECK(r.block_errors.count("edge") == 0);
    CHECK(r.check_verdicts.at("check") == Verdict::Pass);

    std::map<std::string, MeasurementRecord> by_name;
    for (const auto& m : r.measurements) by_name.emplace(m.measurement.name, m);
    CHECK(by_name.at("reg.score").measurement.value == 1.0);
    CHECK(by_name.at("patch.mean").measurement.value == doctest::Approx(0.8).epsilon(1e-3));
    CHECK(std::isnan(by_name.at("dist").measurement.value));
    CHECK(by_name.at("dist").error);

    // Annotations carry the composed D of their block.
    for (const auto& a : r.annotations) {
        if (a.block == "edge") CHECK(testing::max_abs_diff(a.display, r.contexts.at("edge").display) < 1e-12);
    }
}

TEST_CASE("execution under a non-trivial T reports it in every context") {
    const FlowGraph g = parse_graph(small_graph());
    const Transform t = from_similarity(3.0, -2.0, 0.0, 1.0);
    const ExecutionAssets assets{[t](const Image&) { return RegistrationResult{t, 0.9, {3, -2}}; },
                                 {{"patch.mean", 0.0, 1.0}}};
    const ExecutionResult r = execute(g, small_target(), assets);
    const BlockSpec& edge = *g.find("edge");
    CHECK(r.contexts.at("edge").transform == t);
    CHECK(testing::max_abs_diff(r.contexts.at("edge").display, compose(t, roi_to_parent(*edge.roi))) < 1e-12);
}

TEST_CASE("registration failure stops the run") {
    const FlowGraph g = parse_graph(small_graph());
    const ExecutionAssets assets{[](const Image&) -> RegistrationResult {
                                     throw Error(ErrorCode::RegistrationFailed, "score 0.1 below 0.6");
                                 },
                                 {}};
    const ExecutionResult r = execute(g, small_target(), assets);
    CHECK_FALSE(r.registration);
    REQUIRE(r.registration_error);
    CHECK(r.registration_error->find("RegistrationFailed") != std::string::npos);
    CHECK(r.measurements.empty());
    CHECK(r.contexts.empty());
}

TEST_CASE("missing tolerance for a check is a config error") {
    const FlowGraph g = parse_graph(small_graph());
    const ExecutionResult r = execute(g, small_target(), {identity_registrar(), {}});
    CHECK(r.block_errors.at("check").find("ConfigError") != std::string::npos);
    CHECK(r.check_verdicts.at("check") == Verdict::Fail);
}

TEST_CASE("measurement slots follow the naming scheme") {
    const auto slots = measurement_slots(parse_graph(small_graph()));
    std::vector<std::string> names;
    for (const auto& s : slots) names.push_back(s.name);
    CHECK(names == std::vector<std::string>{"reg.score", "patch.mean", "patch.min", "patch.max", "dist"});
}
