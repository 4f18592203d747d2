#pragma once

#include <stdexcept>
#include <string>

namespace eegbench {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used in the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define EEGBENCH_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& message) : Error(tag, message) {}     \
  };

EEGBENCH_DEFINE_ERROR(SchemaError, "schema")
EEGBENCH_DEFINE_ERROR(ParseError, "parse")
EEGBENCH_DEFINE_ERROR(EmptyInputError, "empty_input")
EEGBENCH_DEFINE_ERROR(InsufficientClassError, "insufficient_class")
EEGBENCH_DEFINE_ERROR(IoError, "io")
EEGBENCH_DEFINE_ERROR(StratificationError, "stratification")
EEGBENCH_DEFINE_ERROR(PreconditionError, "precondition")
EEGBENCH_DEFINE_ERROR(FitError, "fit")
EEGBENCH_DEFINE_ERROR(TrainingDivergedError, "training_diverged")
EEGBENCH_DEFINE_ERROR(ShapeError, "shape")
EEGBENCH_DEFINE_ERROR(UndefinedAucError, "undefined_auc")
EEGBENCH_DEFINE_ERROR(ConfigError, "config")

#undef EEGBENCH_DEFINE_ERROR

}  // namespace eegbench
