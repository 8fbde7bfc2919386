/**
 * @file error.hpp
 * @brief Error type shared by all engine modules
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace registra {

enum class ErrorCode {
    // geometry
    NonPositiveScale,
    InvalidTransform,
    // raster
    UnsupportedFormat,
    CorruptFile,
    IoFailure,
    OutOfBounds,
    // registration
    ZeroVariance,
    FlatTemplate,
    TemplateOutOfBounds,
    TemplateTooSmall,
    InvalidSearchParams,
    RegistrationFailed,
    DimensionMismatch,
    // tools
    RoiOutsideTarget,
    InsufficientEdgePoints,
    DegenerateFit,
    NoBlobs,
    InvalidParams,
    // flowchart
    SchemaError,
    DuplicateId,
    UnknownKind,
    CyclicGraph,
    UpstreamFailed,
    // inspection
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace registra
