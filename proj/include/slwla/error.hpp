#pragma once

#include <stdexcept>
#include <string>

namespace slwla {

/// Process exit codes shared by every CLI command.
enum class ExitCode : int {
    ok = 0,
    usage = 1,
    data = 2,
    environment = 3,
    divergence = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::data; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SamplingError : public Error {
public:
    SamplingError(const std::string& aspect, const std::string& what)
        : Error("aspect '" + aspect + "': " + what), aspect_(aspect) {}
    const std::string& aspect() const noexcept { return aspect_; }

private:
    std::string aspect_;
};

/// Checkpoint or results file written by an incompatible or damaged run.
class CompatibilityError : public Error {
public:
    using Error::Error;
};

class EnvironmentError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::environment; }
};

/// Non-finite loss during training. `dump_path` names the diagnostic dump, if one was written.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::string dump_path)
        : Error(what), dump_path_(std::move(dump_path)) {}
    ExitCode exit_code() const noexcept override { return ExitCode::divergence; }
    const std::string& dump_path() const noexcept { return dump_path_; }

private:
    std::string dump_path_;
};

}  // namespace slwla
