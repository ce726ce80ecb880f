#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace floquet_lab {

enum class ErrorKind {
    invalid_dimension,
    invalid_input,
    degenerate_profile,
    dependent_vectors,
    too_large,
    numerical_failure,
    unconverged_spectrum,
    out_of_range,
    undefined_scaling,
    fit_domain,
    config_error,
    validation_error,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace floquet_lab
