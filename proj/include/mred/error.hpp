#pragma once

#include <stdexcept>
#include <string>

namespace mred {

/// Library-wide exception. `code` is a stable machine-readable tag
/// (e.g. "unknown_label", "malformed_record") surfaced by the CLI and the
/// HTTP service; `what()` carries the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace mred
