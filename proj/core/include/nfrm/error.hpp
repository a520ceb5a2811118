// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nfrm {

enum class ErrorCode {
    invalid_argument,
    invalid_geometry,
    singular_geometry,
    empty_channel,
    degenerate_triangulation,
    inconsistent_anchor,
    syntax,
    semantic,
    unknown_key,
    bad_magic,
    version_mismatch,
    truncated_payload,
    dimension,
    io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a stable machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Scenario-text errors additionally report the 1-based source line.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, int line, const std::string& message)
        : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace nfrm
