#pragma once

#include <stdexcept>
#include <string>

namespace cfs {

// Base of all library errors. `name()` is a stable machine-readable
// identifier: the CLI maps it into error JSON and exit codes, tests match
// on it. Messages are free-form context for humans.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& msg)
        : std::runtime_error(msg), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define CFS_DEFINE_ERROR(NAME)                                        \
    class NAME : public Error {                                       \
    public:                                                           \
        explicit NAME(const std::string& msg) : Error(#NAME, msg) {}  \
    }

CFS_DEFINE_ERROR(NotHermitian);
CFS_DEFINE_ERROR(SignatureViolation);
CFS_DEFINE_ERROR(DimensionMismatch);
CFS_DEFINE_ERROR(NotGramUnitary);
CFS_DEFINE_ERROR(ZeroSpinSpace);
CFS_DEFINE_ERROR(DegenerateRange);
CFS_DEFINE_ERROR(DomainError);
CFS_DEFINE_ERROR(InvalidOptions);
CFS_DEFINE_ERROR(OffShell);
CFS_DEFINE_ERROR(QuadratureFailure);
CFS_DEFINE_ERROR(BadFit);
CFS_DEFINE_ERROR(NearLightCone);
CFS_DEFINE_ERROR(SingularGram);
CFS_DEFINE_ERROR(NotRegular);
CFS_DEFINE_ERROR(DegenerateSpectrum);
CFS_DEFINE_ERROR(NotProperlyTimelike);
CFS_DEFINE_ERROR(NotGenericallySeparated);
CFS_DEFINE_ERROR(NoConvergence);
CFS_DEFINE_ERROR(NotSpinConnectable);
CFS_DEFINE_ERROR(PhaseOnQuarterGrid);
CFS_DEFINE_ERROR(NotSpacelike);
CFS_DEFINE_ERROR(ParseError);
CFS_DEFINE_ERROR(OutputPathUnwritable);

#undef CFS_DEFINE_ERROR

} // namespace cfs
