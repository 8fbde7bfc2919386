/**
 * @file serialize.hpp
 * @brief JSON encodings shared by recipes, reports and the HTTP API
 *
 * Canonical text is nlohmann::json's sorted-key dump with two-space indent and
 * a trailing newline; numbers use the library's shortest round-trip format.
 * Readers are strict: unknown keys and wrong types raise
 * Error(SchemaError) with a path such as "graph.blocks[2].params.threshold".
 */
#pragma once

#include <registra/geometry.hpp>
#include <registra/overlay.hpp>
#include <registra/registration.hpp>
#include <registra/tools.hpp>

#include <json.hpp>

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace registra::json_io {

using Json = nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& reason);

/// Rejects keys outside `allowed`; also rejects non-objects.
void expect_object(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed);

[[nodiscard]] double get_number(const Json& obj, const char* key, const std::string& path,
                                std::optional<double> fallback = std::nullopt);
[[nodiscard]] int get_int(const Json& obj, const char* key, const std::string& path,
                          std::optional<int> fallback = std::nullopt);
[[nodiscard]] bool get_bool(const Json& obj, const char* key, const std::string& path,
                            std::optional<bool> fallback = std::nullopt);
[[nodiscard]] std::string get_string(const Json& obj, const char* key, const std::string& path,
                                     std::optional<std::string> fallback = std::nullopt);

[[nodiscard]] Json to_json(Point2 p);
[[nodiscard]] Point2 point_from_json(const Json& j, const std::string& path);

/// {"origin":[x,y], "width", "height", "theta_deg"}
[[nodiscard]] Json to_json(const Roi& roi);
[[nodiscard]] Roi roi_from_json(const Json& j, const std::string& path);

/// 16-element row-major array.
[[nodiscard]] Json to_json(const Transform& t);
[[nodiscard]] Transform transform_from_json(const Json& j, const std::string& path);

[[nodiscard]] Json to_json(const Similarity& s);

[[nodiscard]] Json to_json(const SearchParams& p);
[[nodiscard]] SearchParams search_params_from_json(const Json& j, const std::string& path);

[[nodiscard]] Json to_json(const EdgeParams& p);
[[nodiscard]] EdgeParams edge_params_from_json(const Json& j, const std::string& path);

[[nodiscard]] Json to_json(const BlobParams& p);
[[nodiscard]] BlobParams blob_params_from_json(const Json& j, const std::string& path);

/// Annotations in target-frame coordinates (D already applied).
[[nodiscard]] Json annotations_to_json(std::span<const Annotation> annotations);

[[nodiscard]] std::string canonical_dump(const Json& j);

/// Parse text; malformed JSON becomes Error(SchemaError) at `path`.
[[nodiscard]] Json parse_text(std::string_view text, const std::string& path);

}  // namespace registra::json_io
