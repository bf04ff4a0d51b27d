/**
 * @file errors.hpp
 * @brief Exception types for the failure conditions of the pipeline.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace unwrap {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mask has no usable foreground (empty or below the minimum size).
class EmptyMaskError : public Error {
public:
    using Error::Error;
};

/// Mask still has more than one significant component after cleanup.
class MultipleComponentsError : public Error {
public:
    using Error::Error;
};

/// Chain could not be repaired into a valid contour.
class UnrepairableError : public Error {
public:
    using Error::Error;
};

/// Least-squares system condition number above the accepted limit.
class IllConditionedError : public Error {
public:
    using Error::Error;
};

/// Curve derivative vanished where a frame was requested.
class SingularSpeedError : public Error {
public:
    using Error::Error;
};

/// Fewer than two cross sections available for neutral-line assembly.
class TooFewSectionsError : public Error {
public:
    using Error::Error;
};

/// Template or bend parameters violate their stated invariants.
class InvalidProfileError : public Error {
public:
    using Error::Error;
};

/// Bent body folds onto itself; the deformation is not invertible.
class SelfOverlapError : public Error {
public:
    using Error::Error;
};

/// Alignment reference is shorter than the query curve.
class RefTooShortError : public Error {
public:
    using Error::Error;
};

/// Fewer than two instances given to the consistency metrics.
class TooFewInstancesError : public Error {
public:
    using Error::Error;
};

/// Input/output failure; the message names the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace unwrap
