#pragma once

#include <stdexcept>
#include <string>

namespace charex {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CHAREX_ERROR(Name)                                          \
    struct Name : Error {                                           \
        explicit Name(const std::string& msg) : Error(msg) {}       \
    }

// sphere_geometry
CHAREX_ERROR(PoleRegularityError);
CHAREX_ERROR(GridMismatchError);
CHAREX_ERROR(EigenSolveError);
CHAREX_ERROR(SimplicityViolationError);
CHAREX_ERROR(UniformizationError);

// metric_path
CHAREX_ERROR(ParameterError);

// rotsym_core
CHAREX_ERROR(ExtremalityError);
CHAREX_ERROR(DimensionError);

// glue_bend
CHAREX_ERROR(UngluableError);
CHAREX_ERROR(ZetaConstructionError);
CHAREX_ERROR(GlueHypothesisError);
CHAREX_ERROR(MollificationError);
CHAREX_ERROR(BendPreconditionError);
CHAREX_ERROR(BendSearchError);
CHAREX_ERROR(MassTooSmallError);

// collar_builder
CHAREX_ERROR(PathCoherenceError);
CHAREX_ERROR(AdmissibilityError);
CHAREX_ERROR(EpsilonSearchError);
CHAREX_ERROR(CollarDECError);
CHAREX_ERROR(NeckError);

// io / pipeline
CHAREX_ERROR(IOError);
CHAREX_ERROR(ConfigError);

#undef CHAREX_ERROR

} // namespace charex
