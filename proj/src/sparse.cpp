#include "xlmimo/sparse.hpp"

namespace xlmimo {

std::string_view to_string(OmpStop reason) {
    switch (reason) {
        case OmpStop::ZeroInput: return "zero_input";
        case OmpStop::MaxAtoms: return "max_atoms";
        case OmpStop::ResidualThreshold: return "residual_threshold";
        case OmpStop::ExactFit: return "exact_fit";
        case OmpStop::Exhausted: return "exhausted";
        case OmpStop::IllConditioned: return "ill_conditioned";
    }
    return "unknown";
}

}  // namespace xlmimo
