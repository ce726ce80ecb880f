#include "floquet_lab/error.hpp"

namespace floquet_lab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_dimension: return "invalid-dimension";
        case ErrorKind::invalid_input: return "invalid-input";
        case ErrorKind::degenerate_profile: return "degenerate-profile";
        case ErrorKind::dependent_vectors: return "dependent-vectors";
        case ErrorKind::too_large: return "too-large";
        case ErrorKind::numerical_failure: return "numerical-failure";
        case ErrorKind::unconverged_spectrum: return "unconverged-spectrum";
        case ErrorKind::out_of_range: return "out-of-range";
        case ErrorKind::undefined_scaling: return "undefined-scaling";
        case ErrorKind::fit_domain: return "fit-domain";
        case ErrorKind::config_error: return "config-error";
        case ErrorKind::validation_error: return "validation-error";
    }
    return "unknown";
}

}  // namespace floquet_lab
