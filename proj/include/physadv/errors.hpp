#pragma once

#include <stdexcept>
#include <string>

namespace physadv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct IndexOutOfBounds : Error {
    using Error::Error;
};

// Constraint matrix has full column rank: only the zero perturbation solves it.
struct DegenerateConstraint : Error {
    using Error::Error;
};

// Constraint matrix has rank zero: every variable is free.
struct EmptyConstraint : Error {
    using Error::Error;
};

struct SingularSystem : Error {
    using Error::Error;
};

struct InvalidSpec : Error {
    using Error::Error;
};

struct MalformedFile : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct RankDeficientH : Error {
    using Error::Error;
};

struct InvalidCase : Error {
    using Error::Error;
};

// Rejection sampling exceeded its retry budget.
struct GenerationStall : Error {
    using Error::Error;
};

}  // namespace physadv
