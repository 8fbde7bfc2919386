#include <registra/error.hpp>

namespace registra {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonPositiveScale: return "NonPositiveScale";
        case ErrorCode::InvalidTransform: return "InvalidTransform";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::FlatTemplate: return "FlatTemplate";
        case ErrorCode::TemplateOutOfBounds: return "TemplateOutOfBounds";
        case ErrorCode::TemplateTooSmall: return "TemplateTooSmall";
        case ErrorCode::InvalidSearchParams: return "InvalidSearchParams";
        case ErrorCode::RegistrationFailed: return "RegistrationFailed";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::RoiOutsideTarget: return "RoiOutsideTarget";
        case ErrorCode::InsufficientEdgePoints: return "InsufficientEdgePoints";
        case ErrorCode::DegenerateFit: return "DegenerateFit";
        case ErrorCode::NoBlobs: return "NoBlobs";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::UnknownKind: return "UnknownKind";
        case ErrorCode::CyclicGraph: return "CyclicGraph";
        case ErrorCode::UpstreamFailed: return "UpstreamFailed";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace registra
