/**
 * @file flowchart.cpp
 * @brief Block taxonomy, graph JSON, validation, ordering and execution
 */
#include <registra/flowchart.hpp>
#include <registra/error.hpp>
#include <registra/serialize.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <set>

namespace registra {

namespace {

using json_io::Json;
using PT = PortType;

const std::vector<KindSpec>& kind_table() {
    static const std::vector<KindSpec> table = {
        {BlockKind::Input, {}, {{"image", {PT::Image}}}, false},
        {BlockKind::Registration, {{"image", {PT::Image}}}, {{"image", {PT::Image}}, {"score", {PT::Scalar}}}, true},
        {BlockKind::ExtractLine, {{"image", {PT::Image}}}, {{"line", {PT::Line}}, {"point", {PT::Point}}}, true},
        {BlockKind::MeasureAngle, {{"a", {PT::Line}}, {"b", {PT::Line}}}, {{"value", {PT::Scalar}}}, false},
        {BlockKind::MeasureDistance, {{"a", {PT::Line, PT::Point}}, {"b", {PT::Point}}}, {{"value", {PT::Scalar}}}, false},
        {BlockKind::MeasureIntensity,
         {{"image", {PT::Image}}},
         {{"mean", {PT::Scalar}}, {"min", {PT::Scalar}}, {"max", {PT::Scalar}}},
         true},
        {BlockKind::ExtractBlobs,
         {{"image", {PT::Image}}},
         {{"blobs", {PT::BlobList}}, {"count", {PT::Scalar}}, {"area", {PT::Scalar}}, {"centroid", {PT::Point}}},
         true},
        {BlockKind::ToleranceCheck, {{"value", {PT::Scalar}}}, {{"verdict", {PT::Verdict}}}, false},
        {BlockKind::Output, {{"in", {PT::Scalar, PT::Verdict}, true, true}}, {}, false},
    };
    return table;
}

constexpr std::pair<BlockKind, std::string_view> kKindNames[] = {
    {BlockKind::Input, "input"},
    {BlockKind::Registration, "registration"},
    {BlockKind::ExtractLine, "extract_line"},
    {BlockKind::MeasureAngle, "measure_angle"},
    {BlockKind::MeasureDistance, "measure_distance"},
    {BlockKind::MeasureIntensity, "measure_intensity"},
    {BlockKind::ExtractBlobs, "extract_blobs"},
    {BlockKind::ToleranceCheck, "tolerance_check"},
    {BlockKind::Output, "output"},
};

const PortSpec* find_port(const std::vector<PortSpec>& ports, std::string_view name) {
    for (const auto& p : ports) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

std::optional<MeasurementKind> port_measurement_kind(BlockKind kind, std::string_view port) {
    switch (kind) {
        case BlockKind::Registration:
            if (port == "score") return MeasurementKind::Score;
            break;
        case BlockKind::MeasureAngle: return MeasurementKind::AngleDeg;
        case BlockKind::MeasureDistance: return MeasurementKind::DistancePx;
        case BlockKind::MeasureIntensity: return MeasurementKind::IntensityMean;
        case BlockKind::ExtractBlobs:
            if (port == "count") return MeasurementKind::BlobCount;
            if (port == "area") return MeasurementKind::BlobAreaPx2;
            break;
        default: break;
    }
    return std::nullopt;
}

std::string block_path(const std::string& path, std::size_t i) { return path + ".blocks[" + std::to_string(i) + "]"; }

// ---------------------------------------------------------------------------
// Params JSON
// ---------------------------------------------------------------------------

BlockParams params_from_json(BlockKind kind, const Json& j, const std::string& path) {
    switch (kind) {
        case BlockKind::Registration: return RegistrationParams{json_io::search_params_from_json(j, path)};
        case BlockKind::ExtractLine: return ExtractLineParams{json_io::edge_params_from_json(j, path)};
        case BlockKind::MeasureAngle: {
            json_io::expect_object(j, path, {"mode"});
            const std::string mode = json_io::get_string(j, "mode", path, "undirected");
            if (mode != "undirected" && mode != "directed") {
                json_io::schema_error(path + ".mode", "'" + mode + "' is not one of: undirected, directed");
            }
            return MeasureAngleParams{mode == "directed" ? AngleMode::Directed : AngleMode::Undirected};
        }
        case BlockKind::ExtractBlobs: return ExtractBlobsParams{json_io::blob_params_from_json(j, path)};
        default:
            json_io::expect_object(j, path, {});
            return default_params(kind);
    }
}

Json params_to_json(const BlockParams& params) {
    return std::visit(
        [](const auto& p) -> Json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, RegistrationParams>) {
                return json_io::to_json(p.search);
            } else if constexpr (std::is_same_v<P, ExtractLineParams>) {
                return json_io::to_json(p.edge);
            } else if constexpr (std::is_same_v<P, MeasureAngleParams>) {
                return Json{{"mode", p.mode == AngleMode::Directed ? "directed" : "undirected"}};
            } else if constexpr (std::is_same_v<P, ExtractBlobsParams>) {
                return json_io::to_json(p.blob);
            } else {
                return Json::object();
            }
        },
        params);
}

PortRef port_ref_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string()) {
        json_io::schema_error(path, "expected [block_id, port]");
    }
    return {j[0].get<std::string>(), j[1].get<std::string>()};
}

// ---------------------------------------------------------------------------
// Graph helpers
// ---------------------------------------------------------------------------

// Data edges plus the implicit registration -> block edges carrying T.
std::map<std::string, std::set<std::string>> adjacency(const FlowGraph& g) {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& b : g.blocks) adj[b.id];
    for (const auto& c : g.connections) {
        if (adj.count(c.from.block) && adj.count(c.to.block)) adj[c.from.block].insert(c.to.block);
    }
    std::vector<const BlockSpec*> regs;
    for (const auto& b : g.blocks) {
        if (b.kind == BlockKind::Registration) regs.push_back(&b);
    }
    if (regs.size() == 1) {
        for (const auto& b : g.blocks) {
            if (b.kind != BlockKind::Input && b.kind != BlockKind::Registration) adj[regs.front()->id].insert(b.id);
        }
    }
    return adj;
}

// Kahn's algorithm; returns the order and leaves unprocessed ids in `leftover`.
std::vector<std::string> kahn(const std::map<std::string, std::set<std::string>>& adj, std::set<std::string>& leftover) {
    std::map<std::string, int> indeg;
    for (const auto& [id, outs] : adj) {
        indeg.try_emplace(id, 0);
        for (const auto& o : outs) ++indeg[o];
    }
    std::set<std::string> ready;
    for (const auto& [id, d] : indeg) {
        if (d == 0) ready.insert(id);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        const std::string id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (const auto& o : adj.at(id)) {
            if (--indeg[o] == 0) ready.insert(o);
        }
    }
    leftover.clear();
    for (const auto& [id, d] : indeg) {
        if (d > 0) leftover.insert(id);
    }
    return order;
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::RejectNoRegistration: return "REJECT-NO-REGISTRATION";
        case Verdict::IoError: return "IO-ERROR";
    }
    return "FAIL";
}

std::string_view to_string(BlockKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "input";
}

std::optional<BlockKind> block_kind_from_string(std::string_view s) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (name == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(PortType type) noexcept {
    switch (type) {
        case PortType::Image: return "image";
        case PortType::Transform: return "transform";
        case PortType::Line: return "line";
        case PortType::Point: return "point";
        case PortType::Scalar: return "scalar";
        case PortType::BlobList: return "blob_list";
        case PortType::Verdict: return "verdict";
    }
    return "scalar";
}

const KindSpec& kind_spec(BlockKind kind) {
    for (const auto& k : kind_table()) {
        if (k.kind == kind) return k;
    }
    throw Error(ErrorCode::UnknownKind, "no spec for block kind");
}

BlockParams default_params(BlockKind kind) {
    switch (kind) {
        case BlockKind::Input: return InputParams{};
        case BlockKind::Registration: return RegistrationParams{};
        case BlockKind::ExtractLine: return ExtractLineParams{};
        case BlockKind::MeasureAngle: return MeasureAngleParams{};
        case BlockKind::MeasureDistance: return MeasureDistanceParams{};
        case BlockKind::MeasureIntensity: return MeasureIntensityParams{};
        case BlockKind::ExtractBlobs: return ExtractBlobsParams{};
        case BlockKind::ToleranceCheck: return ToleranceCheckParams{};
        case BlockKind::Output: return OutputParams{};
    }
    return InputParams{};
}

const BlockSpec* FlowGraph::find(std::string_view id) const {
    for (const auto& b : blocks) {
        if (b.id == id) return &b;
    }
    return nullptr;
}

std::string measurement_name(const BlockSpec& block, std::string_view port) {
    if ((block.kind == BlockKind::MeasureAngle || block.kind == BlockKind::MeasureDistance) && port == "value") {
        return block.id;
    }
    return block.id + "." + std::string(port);
}

std::vector<MeasurementSlot> measurement_slots(const FlowGraph& g) {
    std::vector<MeasurementSlot> out;
    for (const auto& b : g.blocks) {
        for (const auto& p : kind_spec(b.kind).outputs) {
            if (auto k = port_measurement_kind(b.kind, p.name); k && p.accepts.front() == PortType::Scalar) {
                out.push_back({measurement_name(b, p.name), *k, b.id, std::string(p.name)});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

FlowGraph parse_graph(const Json& j, const std::string& path) {
    json_io::expect_object(j, path, {"blocks", "connections"});
    if (!j.contains("blocks") || !j["blocks"].is_array()) json_io::schema_error(path + ".blocks", "expected an array");
    FlowGraph g;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j["blocks"].size(); ++i) {
        const Json& jb = j["blocks"][i];
        const std::string bp = block_path(path, i);
        json_io::expect_object(jb, bp, {"id", "kind", "params", "roi", "display"});
        BlockSpec b;
        b.id = json_io::get_string(jb, "id", bp);
        if (b.id.empty()) json_io::schema_error(bp + ".id", "must not be empty");
        const std::string kind = json_io::get_string(jb, "kind", bp);
        const auto k = block_kind_from_string(kind);
        if (!k) throw Error(ErrorCode::UnknownKind, bp + ".kind: unknown block kind '" + kind + "'");
        b.kind = *k;
        if (!ids.insert(b.id).second) throw Error(ErrorCode::DuplicateId, bp + ".id: duplicate block id '" + b.id + "'");
        b.params = params_from_json(b.kind, jb.contains("params") ? jb["params"] : Json::object(), bp + ".params");
        if (jb.contains("roi")) b.roi = json_io::roi_from_json(jb["roi"], bp + ".roi");
        if (jb.contains("display")) {
            json_io::expect_object(jb["display"], bp + ".display", {"x", "y"});
            b.display.x = json_io::get_number(jb["display"], "x", bp + ".display", 0.0);
            b.display.y = json_io::get_number(jb["display"], "y", bp + ".display", 0.0);
        }
        g.blocks.push_back(std::move(b));
    }
    const Json conns = j.contains("connections") ? j["connections"] : Json::array();
    if (!conns.is_array()) json_io::schema_error(path + ".connections", "expected an array");
    for (std::size_t i = 0; i < conns.size(); ++i) {
        const std::string cp = path + ".connections[" + std::to_string(i) + "]";
        json_io::expect_object(conns[i], cp, {"from", "to"});
        if (!conns[i].contains("from") || !conns[i].contains("to")) json_io::schema_error(cp, "needs 'from' and 'to'");
        Connection c{port_ref_from_json(conns[i]["from"], cp + ".from"), port_ref_from_json(conns[i]["to"], cp + ".to")};
        const BlockSpec* from = g.find(c.from.block);
        const BlockSpec* to = g.find(c.to.block);
        if (!from) json_io::schema_error(cp + ".from", "unknown block '" + c.from.block + "'");
        if (!to) json_io::schema_error(cp + ".to", "unknown block '" + c.to.block + "'");
        if (!find_port(kind_spec(from->kind).outputs, c.from.port)) {
            json_io::schema_error(cp + ".from", std::string(to_string(from->kind)) + " has no output port '" + c.from.port + "'");
        }
        if (!find_port(kind_spec(to->kind).inputs, c.to.port)) {
            json_io::schema_error(cp + ".to", std::string(to_string(to->kind)) + " has no input port '" + c.to.port + "'");
        }
        g.connections.push_back(std::move(c));
    }
    return g;
}

FlowGraph parse_graph(std::string_view text) { return parse_graph(json_io::parse_text(text, "graph"), "graph"); }

Json graph_to_json(const FlowGraph& g) {
    Json blocks = Json::array();
    for (const auto& b : g.blocks) {
        Json jb{{"id", b.id},
                {"kind", std::string(to_string(b.kind))},
                {"params", params_to_json(b.params)},
                {"display", Json{{"x", b.display.x}, {"y", b.display.y}}}};
        if (b.roi) jb["roi"] = json_io::to_json(*b.roi);
        blocks.push_back(std::move(jb));
    }
    Json conns = Json::array();
    for (const auto& c : g.connections) {
        conns.push_back(Json{{"from", Json::array({c.from.block, c.from.port})},
                             {"to", Json::array({c.to.block, c.to.port})}});
    }
    return Json{{"blocks", std::move(blocks)}, {"connections", std::move(conns)}};
}

std::string serialize(const FlowGraph& g) { return json_io::canonical_dump(graph_to_json(g)); }

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::vector<Diagnostic> validate(const FlowGraph& g) {
    std::vector<Diagnostic> out;
    auto add = [&](std::string code, std::string msg, std::vector<std::string> blocks) {
        std::sort(blocks.begin(), blocks.end());
        out.push_back({std::move(code), std::move(msg), std::move(blocks)});
    };
    auto ids_of = [&](BlockKind k) {
        std::vector<std::string> ids;
        for (const auto& b : g.blocks) {
            if (b.kind == k) ids.push_back(b.id);
        }
        return ids;
    };

    const auto inputs = ids_of(BlockKind::Input);
    if (inputs.empty()) add("MissingInput", "graph has no input block", {});
    if (inputs.size() > 1) add("MultipleInputs", "graph must have exactly one input block", inputs);

    const auto regs = ids_of(BlockKind::Registration);
    if (regs.empty()) add("MissingRegistration", "graph has no registration block", {});
    if (regs.size() > 1) add("MultipleRegistrations", "graph must have exactly one registration block", regs);
    if (regs.size() == 1 && inputs.size() == 1) {
        const bool fed = std::any_of(g.connections.begin(), g.connections.end(), [&](const Connection& c) {
            return c.to.block == regs.front() && c.to.port == "image" && c.from.block == inputs.front();
        });
        if (!fed) add("RegistrationNotFedByInput", "registration must consume the input block's image", regs);
    }

    const auto outputs = ids_of(BlockKind::Output);
    if (outputs.empty()) add("MissingOutput", "graph has no output block", {});
    if (outputs.size() > 1) add("MultipleOutputs", "graph must have exactly one output block", outputs);
    for (const auto& o : outputs) {
        const bool fed = std::any_of(g.connections.begin(), g.connections.end(),
                                     [&](const Connection& c) { return c.to.block == o; });
        if (!fed) add("NoOutputPath", "output block receives no measurement or verdict", {o});
    }

    for (const auto& b : g.blocks) {
        const bool wants = kind_spec(b.kind).takes_roi;
        if (wants && !b.roi) add("MissingRoi", std::string(to_string(b.kind)) + " block needs a roi", {b.id});
        if (!wants && b.roi) add("UnexpectedRoi", std::string(to_string(b.kind)) + " block takes no roi", {b.id});
        if (b.kind == BlockKind::Registration && b.roi && b.roi->theta_deg != 0.0) {
            add("InvalidTemplateRoi", "registration template must be axis-aligned", {b.id});
        }
    }

    // Port typing and fan-in.
    std::map<std::pair<std::string, std::string>, std::vector<const Connection*>> incoming;
    for (const auto& c : g.connections) {
        const BlockSpec* from = g.find(c.from.block);
        const BlockSpec* to = g.find(c.to.block);
        if (!from || !to) {
            add("UnknownBlock", "connection references a missing block", {c.from.block, c.to.block});
            continue;
        }
        const PortSpec* op = find_port(kind_spec(from->kind).outputs, c.from.port);
        const PortSpec* ip = find_port(kind_spec(to->kind).inputs, c.to.port);
        if (!op || !ip) {
            add("UnknownPort", "connection references a missing port", {c.from.block, c.to.block});
            continue;
        }
        incoming[{c.to.block, c.to.port}].push_back(&c);
        const PortType t = op->accepts.front();
        if (std::find(ip->accepts.begin(), ip->accepts.end(), t) == ip->accepts.end()) {
            add("TypeMismatch",
                c.from.block + "." + c.from.port + " (" + std::string(to_string(t)) + ") cannot feed " + c.to.block +
                    "." + c.to.port,
                {c.from.block, c.to.block});
        }
    }
    for (const auto& b : g.blocks) {
        for (const auto& p : kind_spec(b.kind).inputs) {
            const auto it = incoming.find({b.id, std::string(p.name)});
            const std::size_t n = it == incoming.end() ? 0 : it->second.size();
            if (n == 0 && p.required) {
                add("UnconnectedPort", b.id + "." + std::string(p.name) + " is not connected", {b.id});
            }
            if (n > 1 && !p.multi) {
                add("MultipleConnections", b.id + "." + std::string(p.name) + " has " + std::to_string(n) + " inputs", {b.id});
            }
        }
    }

    // Cycles: Kahn leftovers, then peel nodes that only lead out of the leftover set.
    std::set<std::string> leftover;
    const auto adj = adjacency(g);
    kahn(adj, leftover);
    if (!leftover.empty()) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto it = leftover.begin(); it != leftover.end();) {
                const auto& outs = adj.at(*it);
                const bool feeds_back = std::any_of(outs.begin(), outs.end(), [&](const std::string& o) { return leftover.count(o) > 0; });
                if (!feeds_back) {
                    it = leftover.erase(it);
                    changed = true;
                } else {
                    ++it;
                }
            }
        }
        std::vector<std::string> ids(leftover.begin(), leftover.end());
        std::string list;
        for (const auto& id : ids) list += (list.empty() ? "" : ", ") + id;
        add("Cycle", "cycle through: " + list, ids);
    }

    // Reachability from the input over data edges.
    if (inputs.size() == 1) {
        std::set<std::string> seen{inputs.front()};
        std::deque<std::string> queue{inputs.front()};
        while (!queue.empty()) {
            const std::string id = queue.front();
            queue.pop_front();
            for (const auto& c : g.connections) {
                if (c.from.block == id && seen.insert(c.to.block).second) queue.push_back(c.to.block);
            }
        }
        std::vector<std::string> unreachable;
        for (const auto& b : g.blocks) {
            if (!seen.count(b.id)) unreachable.push_back(b.id);
        }
        if (!unreachable.empty()) add("Unreachable", "blocks not reachable from the input", unreachable);
    }
    return out;
}

std::vector<std::string> topo_order(const FlowGraph& g) {
    std::set<std::string> leftover;
    auto order = kahn(adjacency(g), leftover);
    if (!leftover.empty()) throw Error(ErrorCode::CyclicGraph, "graph contains a cycle");
    return order;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

Registrar model_registrar(const RegistrationModel& model) {
    return [&model](const Image& target) { return register_target(model, target); };
}

Registrar identity_registrar() {
    return [](const Image&) { return RegistrationResult{identity(), 1.0, {0.0, 0.0}}; };
}

namespace {

using Value = std::variant<std::monostate, Image, LineModel, Point2, double, std::vector<Blob>, Verdict>;

std::string port_key(std::string_view block, std::string_view port) {
    return std::string(block) + '\n' + std::string(port);
}

std::string format_value(const std::string& name, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s %.2f", name.c_str(), v);
    return buf;
}

Roi local_outline(const Roi& roi) { return Roi{{0.0, 0.0}, roi.width, roi.height, 0.0}; }

class Executor {
public:
    Executor(const FlowGraph& g, const Image& target, const ExecutionAssets& assets)
        : g_(g), target_(target), assets_(assets) {}

    ExecutionResult run() {
        result_.order = topo_order(g_);
        for (const auto& id : result_.order) {
            const BlockSpec& b = *g_.find(id);
            if (b.kind == BlockKind::Input) {
                values_[port_key(b.id, "image")] = target_;
                continue;
            }
            if (b.kind == BlockKind::Registration) {
                if (!run_registration(b)) return std::move(result_);
                continue;
            }
            const auto t0 = std::chrono::steady_clock::now();
            run_block(b);
            result_.tools_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
        return std::move(result_);
    }

private:
    const Value* input(const BlockSpec& b, std::string_view port) const {
        for (const auto& c : g_.connections) {
            if (c.to.block == b.id && c.to.port == port) {
                auto it = values_.find(port_key(c.from.block, c.from.port));
                return it == values_.end() ? nullptr : &it->second;
            }
        }
        return nullptr;
    }

    const Connection* source_of(const BlockSpec& b, std::string_view port) const {
        for (const auto& c : g_.connections) {
            if (c.to.block == b.id && c.to.port == port) return &c;
        }
        return nullptr;
    }

    void emit(const BlockSpec& b, AnnotationShape shape, const Transform& d, AnnotationStyle style = AnnotationStyle::Info) {
        result_.annotations.push_back({std::move(shape), d, style, b.id});
    }

    void publish(const BlockSpec& b, std::string_view port, double v) {
        values_[port_key(b.id, port)] = v;
        result_.measurements.push_back({{measurement_name(b, port), *port_measurement_kind(b.kind, port), v}, b.id, std::nullopt});
    }

    bool run_registration(const BlockSpec& b) {
        const auto t0 = std::chrono::steady_clock::now();
        const Value* in = input(b, "image");
        try {
            if (!in || !std::holds_alternative<Image>(*in)) throw Error(ErrorCode::UpstreamFailed, "registration has no image");
            result_.registration = assets_.registrar(std::get<Image>(*in));
        } catch (const Error& e) {
            result_.registration_error = e.what();
            result_.registration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            return false;
        }
        result_.registration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        transform_ = result_.registration->transform;
        values_[port_key(b.id, "image")] = std::get<Image>(*in);
        publish(b, "score", result_.registration->score);
        if (b.roi) {
            const Transform d = compose(transform_, roi_to_parent(*b.roi));
            result_.contexts[b.id] = {transform_, d};
            emit(b, RoiOutlineShape{local_outline(*b.roi)}, d);
            emit(b, LabelShape{format_value("reg", result_.registration->score), {0.0, -10.0}}, d);
        }
        return true;
    }

    void fail_block(const BlockSpec& b, const std::string& why, const Transform& d) {
        result_.block_errors[b.id] = why;
        for (const auto& p : kind_spec(b.kind).outputs) {
            if (auto k = port_measurement_kind(b.kind, p.name); k && p.accepts.front() == PortType::Scalar) {
                result_.measurements.push_back({{measurement_name(b, p.name), *k, std::numeric_limits<double>::quiet_NaN()}, b.id, why});
            }
        }
        if (b.roi) emit(b, RoiOutlineShape{local_outline(*b.roi)}, d, AnnotationStyle::Fail);
        if (b.kind == BlockKind::ToleranceCheck) result_.check_verdicts[b.id] = Verdict::Fail;
    }

    template <typename T>
    const T& need(const BlockSpec& b, std::string_view port) const {
        const Value* v = input(b, port);
        if (!v || !std::holds_alternative<T>(*v)) {
            const Connection* c = source_of(b, port);
            throw Error(ErrorCode::UpstreamFailed, "input '" + std::string(port) + "' unavailable" +
                                                       (c ? " (from " + c->from.block + ")" : std::string()));
        }
        return std::get<T>(*v);
    }

    void run_block(const BlockSpec& b) {
        const Transform d = b.roi ? compose(transform_, roi_to_parent(*b.roi)) : transform_;
        result_.contexts[b.id] = {transform_, d};
        try {
            switch (b.kind) {
                case BlockKind::ExtractLine: run_line(b, d); break;
                case BlockKind::MeasureAngle: run_angle(b); break;
                case BlockKind::MeasureDistance: run_distance(b); break;
                case BlockKind::MeasureIntensity: run_intensity(b, d); break;
                case BlockKind::ExtractBlobs: run_blobs(b, d); break;
                case BlockKind::ToleranceCheck: run_check(b); break;
                default: break;
            }
        } catch (const Error& e) {
            fail_block(b, e.what(), d);
        }
    }

    void run_line(const BlockSpec& b, const Transform& d) {
        const ToolContext ctx(transform_, need<Image>(b, "image"));
        const Roi& roi = *b.roi;
        const LineExtraction ex = extract_line(ctx, roi, std::get<ExtractLineParams>(b.params).edge);
        values_[port_key(b.id, "line")] = ex.line;
        values_[port_key(b.id, "point")] = ex.line.point;
        emit(b, RoiOutlineShape{local_outline(roi)}, d);
        for (const Point2& p : ex.local_edges) emit(b, MarkerShape{p}, d);
        // Fitted line clipped to the ROI's local y extent.
        const Transform to_local = invert(roi_to_parent(roi));
        const Point2 p = apply(to_local, ex.line.point);
        const Point2 o = apply(to_local, {0.0, 0.0});
        const Point2 q = apply(to_local, {ex.line.dir.x, ex.line.dir.y});
        const Point2 dir{q.x - o.x, q.y - o.y};
        double t0 = -roi.width * 0.5, t1 = roi.width * 0.5;
        if (std::abs(dir.y) > 1e-9) {
            t0 = (0.0 - p.y) / dir.y;
            t1 = (roi.height - p.y) / dir.y;
        }
        emit(b, SegmentShape{{p.x + t0 * dir.x, p.y + t0 * dir.y}, {p.x + t1 * dir.x, p.y + t1 * dir.y}}, d);
    }

    void run_angle(const BlockSpec& b) {
        const LineModel& la = need<LineModel>(b, "a");
        const LineModel& lb = need<LineModel>(b, "b");
        const Measurement m = measure_angle(b.id, la, lb, std::get<MeasureAngleParams>(b.params).mode);
        publish(b, "value", m.value);
        const Point2 mid{(la.point.x + lb.point.x) * 0.5, (la.point.y + lb.point.y) * 0.5};
        emit(b, SegmentShape{la.point, lb.point}, transform_);
        emit(b, LabelShape{format_value(b.id, m.value), mid}, transform_);
    }

    void run_distance(const BlockSpec& b) {
        const Point2& pb = need<Point2>(b, "b");
        const Value* va = input(b, "a");
        Point2 foot;
        double value = 0.0;
        if (va && std::holds_alternative<LineModel>(*va)) {
            const LineModel& la = std::get<LineModel>(*va);
            value = measure_distance(b.id, la, pb).value;
            const double t = (pb.x - la.point.x) * la.dir.x + (pb.y - la.point.y) * la.dir.y;
            foot = {la.point.x + t * la.dir.x, la.point.y + t * la.dir.y};
        } else {
            foot = need<Point2>(b, "a");
            value = measure_distance(b.id, foot, pb).value;
        }
        publish(b, "value", value);
        emit(b, SegmentShape{foot, pb}, transform_);
        emit(b, LabelShape{format_value(b.id, value), {(foot.x + pb.x) * 0.5 + 4.0, (foot.y + pb.y) * 0.5}}, transform_);
    }

    void run_intensity(const BlockSpec& b, const Transform& d) {
        const ToolContext ctx(transform_, need<Image>(b, "image"));
        const IntensityStats s = measure_intensity(ctx, *b.roi);
        publish(b, "mean", s.mean);
        publish(b, "min", s.min);
        publish(b, "max", s.max);
        emit(b, RoiOutlineShape{local_outline(*b.roi)}, d);
        emit(b, LabelShape{format_value(b.id, s.mean), {0.0, b.roi->height + 3.0}}, d);
    }

    void run_blobs(const BlockSpec& b, const Transform& d) {
        const ToolContext ctx(transform_, need<Image>(b, "image"));
        const auto blobs = extract_blobs(ctx, *b.roi, std::get<ExtractBlobsParams>(b.params).blob);
        values_[port_key(b.id, "blobs")] = blobs;
        publish(b, "count", static_cast<double>(blobs.size()));
        publish(b, "area", blobs.empty() ? 0.0 : blobs.front().area);
        if (!blobs.empty()) values_[port_key(b.id, "centroid")] = blobs.front().centroid;
        emit(b, RoiOutlineShape{local_outline(*b.roi)}, d);
        for (const Blob& bl : blobs) emit(b, MarkerShape{bl.local_centroid}, d);
        emit(b, LabelShape{format_value(b.id, static_cast<double>(blobs.size())), {0.0, b.roi->height + 3.0}}, d);
    }

    void run_check(const BlockSpec& b) {
        const Connection* c = source_of(b, "value");
        const double v = need<double>(b, "value");
        const std::string name = measurement_name(*g_.find(c->from.block), c->from.port);
        const auto it = std::find_if(assets_.tolerances.begin(), assets_.tolerances.end(),
                                     [&](const Tolerance& t) { return t.measurement == name; });
        if (it == assets_.tolerances.end()) throw Error(ErrorCode::ConfigError, "no tolerance for '" + name + "'");
        const Verdict verdict = in_band(v, *it) ? Verdict::Pass : Verdict::Fail;
        values_[port_key(b.id, "verdict")] = verdict;
        result_.check_verdicts[b.id] = verdict;
    }

    const FlowGraph& g_;
    const Image& target_;
    const ExecutionAssets& assets_;
    Transform transform_;
    std::map<std::string, Value> values_;
    ExecutionResult result_;
};

}  // namespace

ExecutionResult execute(const FlowGraph& g, const Image& target, const ExecutionAssets& assets) {
    return Executor(g, target, assets).run();
}

}  // namespace registra
