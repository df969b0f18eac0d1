#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modalgauge {

/// Base of every error raised by the library. The CLI maps these to exit
/// code 1 (input/config) or records them per task.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// embed_io
class FormatError : public Error { using Error::Error; };
class TruncationError : public Error { using Error::Error; };
class DtypeError : public Error { using Error::Error; };
class IntegrityError : public Error { using Error::Error; };
class LabelError : public Error { using Error::Error; };
class NormalizationError : public Error { using Error::Error; };
class ManifestError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

class DegenerateRowError : public Error {
public:
  DegenerateRowError(std::size_t row, const std::string& what)
      : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

// measures
class InsufficientDataError : public Error { using Error::Error; };
class DegenerateGeometryError : public Error { using Error::Error; };
class SingularBandwidthError : public Error { using Error::Error; };
class NameError : public Error { using Error::Error; };

// shared by measures and stats
class ParameterError : public Error { using Error::Error; };

// stats
class DataError : public Error { using Error::Error; };
class DegenerateDataError : public Error { using Error::Error; };
class DegenerateResponseError : public Error { using Error::Error; };

// transfer
class PerfectZeroShotError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class DuplicateRecordError : public Error { using Error::Error; };
class MissingRecordError : public Error { using Error::Error; };

/// Malformed CSV/JSON table input; the message names row and column.
class SchemaError : public Error { using Error::Error; };

}  // namespace modalgauge
