#pragma once

#include <stdexcept>
#include <string>

namespace lsw {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidProfile : Error { using Error::Error; };
struct NonIntegrableTail : Error { using Error::Error; };
struct DegenerateProfile : Error { using Error::Error; };
struct InconsistentBeta : Error { using Error::Error; };
struct UnsupportedOperation : Error { using Error::Error; };
struct InvalidMap : Error { using Error::Error; };
struct DegenerateImage : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct Extinction : Error { using Error::Error; };

}  // namespace lsw
