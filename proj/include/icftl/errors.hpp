#pragma once

#include <stdexcept>
#include <string>

namespace icftl {

// Base for all toolkit errors. `phase` names the pipeline stage for the
// CLI's structured error output.
class Error : public std::runtime_error {
public:
    Error(std::string phase, const std::string& message)
        : std::runtime_error(message), phase_(std::move(phase)) {}

    const std::string& phase() const { return phase_; }

private:
    std::string phase_;
};

class SyntaxError : public Error {
public:
    SyntaxError(int line, const std::string& message)
        : Error("parse", "line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

class LinkError : public Error {
public:
    explicit LinkError(const std::string& message) : Error("link", message) {}
};

class ScopeError : public Error {
public:
    explicit ScopeError(const std::string& message) : Error("parse", message) {}
};

class FormatError : public Error {
public:
    FormatError(int line, const std::string& message)
        : Error("trace-io", "line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

class RuntimeError : public Error {
public:
    RuntimeError(std::string proc, int line, const std::string& message)
        : Error("execute", proc + ":" + std::to_string(line) + ": " + message),
          proc_(std::move(proc)), line_(line) {}

    const std::string& proc() const { return proc_; }
    int line() const { return line_; }

private:
    std::string proc_;
    int line_;
};

class DepthExceeded : public Error {
public:
    explicit DepthExceeded(int limit)
        : Error("execute", "call depth exceeded limit of " + std::to_string(limit)) {}
};

class NotAParameter : public Error {
public:
    explicit NotAParameter(const std::string& message) : Error("instrument", message) {}
};

// Raised when a call argument at a requested position is an integer literal;
// the literal is self-explaining and ends the inter-procedural dataflow chain.
class LiteralArgument : public Error {
public:
    explicit LiteralArgument(const std::string& message) : Error("instrument", message) {}
};

class InvariantViolation : public Error {
public:
    explicit InvariantViolation(const std::string& message) : Error("internal", message) {}
};

class MissingValue : public Error {
public:
    explicit MissingValue(const std::string& message) : Error("monitor", message) {}
};

}  // namespace icftl
