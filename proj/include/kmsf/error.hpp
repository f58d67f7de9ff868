#pragma once

#include <stdexcept>
#include <string>

namespace kmsf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define KMSF_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

KMSF_DEFINE_ERROR(BudgetError)
KMSF_DEFINE_ERROR(ConfigurationError)
KMSF_DEFINE_ERROR(DegenerateSystemError)
KMSF_DEFINE_ERROR(NotProperContractionError)
KMSF_DEFINE_ERROR(NotAnImageError)
KMSF_DEFINE_ERROR(DomainError)
KMSF_DEFINE_ERROR(ShapeError)
KMSF_DEFINE_ERROR(BranchCompatibilityError)
KMSF_DEFINE_ERROR(GeometryError)
KMSF_DEFINE_ERROR(PresetIntegrityError)
KMSF_DEFINE_ERROR(UnboundedSeriesError)
KMSF_DEFINE_ERROR(NormalizationError)

#undef KMSF_DEFINE_ERROR

}  // namespace kmsf
