/**
 * @file flowchart.hpp
 * @brief Typed block graph of an inspection pipeline
 *
 * Blocks expose explicit data ports (image, line, point, scalar, blob list,
 * verdict). The registration transform T and the per-block display transform
 * D are not ports: the engine hands every block a context carrying both, so
 * they never appear in the connection list.
 *
 * Measurement naming: measure_angle and measure_distance publish their value
 * under the block id; every other scalar output is published as "<id>.<port>"
 * (for example "blobs.count", "patch.mean", "reg.score").
 */
#pragma once

#include <registra/geometry.hpp>
#include <registra/overlay.hpp>
#include <registra/raster.hpp>
#include <registra/registration.hpp>
#include <registra/tolerance.hpp>
#include <registra/tools.hpp>

#include <json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace registra {

enum class BlockKind {
    Input,
    Registration,
    ExtractLine,
    MeasureAngle,
    MeasureDistance,
    MeasureIntensity,
    ExtractBlobs,
    ToleranceCheck,
    Output,
};

enum class PortType { Image, Transform, Line, Point, Scalar, BlobList, Verdict };

[[nodiscard]] std::string_view to_string(BlockKind kind) noexcept;
[[nodiscard]] std::optional<BlockKind> block_kind_from_string(std::string_view s) noexcept;
[[nodiscard]] std::string_view to_string(PortType type) noexcept;

struct PortSpec {
    std::string_view name;
    std::vector<PortType> accepts;   ///< outputs list exactly one type
    bool required = true;
    bool multi = false;              ///< input accepting several connections
};

struct KindSpec {
    BlockKind kind;
    std::vector<PortSpec> inputs;
    std::vector<PortSpec> outputs;
    bool takes_roi = false;
};

[[nodiscard]] const KindSpec& kind_spec(BlockKind kind);

struct InputParams {};
struct RegistrationParams {
    SearchParams search;
};
struct ExtractLineParams {
    EdgeParams edge;
};
struct MeasureAngleParams {
    AngleMode mode = AngleMode::Undirected;
};
struct MeasureDistanceParams {};
struct MeasureIntensityParams {};
struct ExtractBlobsParams {
    BlobParams blob;
};
struct ToleranceCheckParams {};
struct OutputParams {};

using BlockParams = std::variant<InputParams, RegistrationParams, ExtractLineParams, MeasureAngleParams,
                                 MeasureDistanceParams, MeasureIntensityParams, ExtractBlobsParams,
                                 ToleranceCheckParams, OutputParams>;

[[nodiscard]] BlockParams default_params(BlockKind kind);

struct Layout {
    double x = 0.0;
    double y = 0.0;
};

struct BlockSpec {
    std::string id;
    BlockKind kind = BlockKind::Input;
    BlockParams params;
    std::optional<Roi> roi;     ///< source frame; the template region for registration
    Layout display;
};

struct PortRef {
    std::string block;
    std::string port;
    friend bool operator==(const PortRef&, const PortRef&) = default;
};

struct Connection {
    PortRef from;
    PortRef to;
};

struct FlowGraph {
    std::vector<BlockSpec> blocks;
    std::vector<Connection> connections;

    [[nodiscard]] const BlockSpec* find(std::string_view id) const;
};

/// Name under which a scalar output port is published.
[[nodiscard]] std::string measurement_name(const BlockSpec& block, std::string_view port);

struct MeasurementSlot {
    std::string name;
    MeasurementKind kind;
    std::string block;
    std::string port;
};

/// Every measurement the graph can publish, in block order then port order.
[[nodiscard]] std::vector<MeasurementSlot> measurement_slots(const FlowGraph& g);

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// Errors: SchemaError (path-qualified), DuplicateId, UnknownKind.
[[nodiscard]] FlowGraph parse_graph(const nlohmann::json& j, const std::string& path = "graph");
[[nodiscard]] FlowGraph parse_graph(std::string_view text);
[[nodiscard]] nlohmann::json graph_to_json(const FlowGraph& g);
/// Canonical text: sorted keys, defaults filled in, shortest round-trip numbers.
[[nodiscard]] std::string serialize(const FlowGraph& g);

// ---------------------------------------------------------------------------
// Validation and ordering
// ---------------------------------------------------------------------------

struct Diagnostic {
    std::string code;                 ///< e.g. "Cycle", "MissingRegistration"
    std::string message;
    std::vector<std::string> blocks;  ///< ids involved, sorted
};

[[nodiscard]] std::vector<Diagnostic> validate(const FlowGraph& g);

/// Kahn's algorithm with lexicographic tie-break; Error(CyclicGraph) on a cycle.
[[nodiscard]] std::vector<std::string> topo_order(const FlowGraph& g);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// Recovers T for a target; throws Error(RegistrationFailed) when it cannot.
using Registrar = std::function<RegistrationResult(const Image& target)>;

[[nodiscard]] Registrar model_registrar(const RegistrationModel& model);
/// Degenerate acquire-analyze mode: T is always the identity.
[[nodiscard]] Registrar identity_registrar();

struct ExecutionAssets {
    Registrar registrar;
    std::vector<Tolerance> tolerances;   ///< consulted by tolerance_check blocks
};

struct MeasurementRecord {
    Measurement measurement;
    std::string block;
    std::optional<std::string> error;    ///< set when the producing block failed
};

/// T and D as handed to one block by the engine.
struct BlockContext {
    Transform transform;
    Transform display;
};

struct ExecutionResult {
    std::vector<std::string> order;
    std::optional<RegistrationResult> registration;
    std::optional<std::string> registration_error;
    std::vector<MeasurementRecord> measurements;    ///< topo order
    std::vector<Annotation> annotations;
    std::map<std::string, BlockContext> contexts;   ///< every block after registration
    std::map<std::string, std::string> block_errors;
    std::map<std::string, Verdict> check_verdicts;  ///< tolerance_check block -> verdict
    double registration_ms = 0.0;
    double tools_ms = 0.0;
};

/**
 * @brief Run the graph on one target
 *
 * Precondition: validate(g) is empty. Registration failure stops the run and
 * is reported in registration_error; tool failures are recorded per block and
 * the remaining independent branches still run.
 */
[[nodiscard]] ExecutionResult execute(const FlowGraph& g, const Image& target, const ExecutionAssets& assets);

}  // namespace registra
