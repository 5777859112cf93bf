#pragma once
#include <stdexcept>
#include <string>

namespace cornet {

// Error taxonomy shared across the library. Tests and the CLI distinguish
// these; everything derives from std::runtime_error so callers that do not
// care can catch one type.
struct shape_error : std::runtime_error {
    explicit shape_error(const std::string& m) : std::runtime_error("shape error: " + m) {}
};
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& m) : std::runtime_error("numeric error: " + m) {}
};
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& m) : std::runtime_error("parse error: " + m) {}
};
struct config_error : std::runtime_error {
    explicit config_error(const std::string& m) : std::runtime_error("config error: " + m) {}
};
struct fit_error : std::runtime_error {
    explicit fit_error(const std::string& m) : std::runtime_error("fit error: " + m) {}
};
struct protocol_error : std::runtime_error {
    explicit protocol_error(const std::string& m) : std::runtime_error("protocol error: " + m) {}
};

}  // namespace cornet
