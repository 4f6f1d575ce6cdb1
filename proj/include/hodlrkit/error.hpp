#pragma once

#include <stdexcept>
#include <string>

namespace hodlrkit {

enum class errc {
    invalid_argument,
    dimension_mismatch,
    singular_matrix,
    no_convergence,
    empty_selection,
    degenerate_skeleton,
    singular_leaf,
    singular_schur,
    gmres_breakdown,
    invalid_plane,
    singular_interior,
    parse_error,
    block_out_of_range,
    io_error,
};

inline const char* to_string(errc code)
{
    switch (code) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::singular_matrix: return "SingularMatrix";
    case errc::no_convergence: return "NoConvergence";
    case errc::empty_selection: return "EmptySelection";
    case errc::degenerate_skeleton: return "DegenerateSkeleton";
    case errc::singular_leaf: return "SingularLeaf";
    case errc::singular_schur: return "SingularSchur";
    case errc::gmres_breakdown: return "Breakdown";
    case errc::invalid_plane: return "InvalidPlane";
    case errc::singular_interior: return "SingularInterior";
    case errc::parse_error: return "ParseError";
    case errc::block_out_of_range: return "BlockOutOfRange";
    case errc::io_error: return "IOError";
    }
    return "Unknown";
}

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI's exit-code mapping) can dispatch without string matching.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace hodlrkit
