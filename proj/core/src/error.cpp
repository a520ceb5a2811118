// SPDX-License-Identifier: Apache-2.0
#include "nfrm/error.hpp"

namespace nfrm {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_geometry: return "invalid-geometry";
    case ErrorCode::singular_geometry: return "singular-geometry";
    case ErrorCode::empty_channel: return "empty-channel";
    case ErrorCode::degenerate_triangulation: return "degenerate-triangulation";
    case ErrorCode::inconsistent_anchor: return "inconsistent-anchor";
    case ErrorCode::syntax: return "syntax";
    case ErrorCode::semantic: return "semantic";
    case ErrorCode::unknown_key: return "unknown-key";
    case ErrorCode::bad_magic: return "bad-magic";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::truncated_payload: return "truncated-payload";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::io: return "io";
    }
    return "unknown";
}

} // namespace nfrm
