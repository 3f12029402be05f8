#ifndef STAGEMAP_ERRORS_HPP
#define STAGEMAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stagemap {

// Base class for everything this library throws on purpose.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (JSON / CSV syntax, wrong schema shape).
class parse_error : public error {
public:
    explicit parse_error(const std::string& msg) : error("parse error: " + msg) {}
};

// Structurally well-formed input that violates a documented invariant.
class validation_error : public error {
public:
    explicit validation_error(const std::string& msg) : error("validation error: " + msg) {}
};

} // namespace stagemap

#endif
