#pragma once

#include <stdexcept>
#include <string>

namespace tfa {

/// Base class of every error raised by the library. Each precondition
/// failure has its own subclass so callers can catch exactly what they expect.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define TFA_DEFINE_ERROR(Name)                                                 \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string &what) : Error(#Name ": " + what) {}       \
  }

TFA_DEFINE_ERROR(OffGridShift);
TFA_DEFINE_ERROR(ZeroWindow);
TFA_DEFINE_ERROR(RangeExceeded);
TFA_DEFINE_ERROR(ShapeMismatch);
TFA_DEFINE_ERROR(GridMismatch);
TFA_DEFINE_ERROR(LatticeMismatch);
TFA_DEFINE_ERROR(NotIntegrable);
TFA_DEFINE_ERROR(EmptyCell);
TFA_DEFINE_ERROR(NotAFrame);
TFA_DEFINE_ERROR(InsufficientData);
TFA_DEFINE_ERROR(AllBelowFloor);
TFA_DEFINE_ERROR(NotInCatalog);
TFA_DEFINE_ERROR(NonSquareGrid);
TFA_DEFINE_ERROR(MissingWindow);
TFA_DEFINE_ERROR(PacketEscapesBox);
TFA_DEFINE_ERROR(MidpointUnrepresentable);
TFA_DEFINE_ERROR(InvalidArgument);
TFA_DEFINE_ERROR(IoError);
TFA_DEFINE_ERROR(ConfigError);

#undef TFA_DEFINE_ERROR

} // namespace tfa
