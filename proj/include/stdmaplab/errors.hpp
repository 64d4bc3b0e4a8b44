#ifndef STDMAPLAB_ERRORS_HPP
#define STDMAPLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stdmaplab {

/// Base class for all library errors. The `kind()` string is stable and
/// machine-readable; the CLI forwards it into error JSON.
class error : public std::runtime_error {
public:
    error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class invalid_parameter_error : public error {
public:
    explicit invalid_parameter_error(const std::string& msg) : error("invalid-parameter", msg) {}
};

class invalid_input_error : public error {
public:
    explicit invalid_input_error(const std::string& msg) : error("invalid-input", msg) {}
};

class numeric_overflow_error : public error {
public:
    explicit numeric_overflow_error(const std::string& msg) : error("numeric-overflow", msg) {}
};

class frame_unresolved_error : public error {
public:
    explicit frame_unresolved_error(const std::string& msg) : error("frame-unresolved", msg) {}
};

class cone_degenerate_error : public error {
public:
    explicit cone_degenerate_error(const std::string& msg) : error("cone-degenerate", msg) {}
};

class not_periodic_error : public error {
public:
    explicit not_periodic_error(const std::string& msg) : error("not-periodic", msg) {}
};

class insufficient_data_error : public error {
public:
    explicit insufficient_data_error(const std::string& msg) : error("insufficient-data", msg) {}
};

class inconsistent_inputs_error : public error {
public:
    explicit inconsistent_inputs_error(const std::string& msg) : error("inconsistent-inputs", msg) {}
};

class cache_error : public error {
public:
    explicit cache_error(const std::string& msg) : error("cache-error", msg) {}
};

} // namespace stdmaplab

#endif
