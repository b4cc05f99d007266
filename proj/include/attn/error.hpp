#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attn {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or missing external input. The CLI maps these to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

class MalformedRow : public InputError {
public:
    MalformedRow(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingStageArtifact : public InputError {
public:
    using InputError::InputError;
};

class MissingLesson : public InputError {
public:
    using InputError::InputError;
};

class UnsupportedAudio : public InputError {
public:
    using InputError::InputError;
};

// API contract violations.
class EmptySeries : public Error {
public:
    EmptySeries() : Error("series is empty") {}
};

class SeriesTooShort : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class ModalityMismatch : public Error {
public:
    using Error::Error;
};

class NonPowerOfTwoLength : public Error {
public:
    explicit NonPowerOfTwoLength(std::size_t n)
        : Error("FFT length " + std::to_string(n) + " is not a power of two") {}
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class EmptySplit : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

}  // namespace attn
