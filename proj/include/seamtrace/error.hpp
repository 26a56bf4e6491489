#pragma once

#include <stdexcept>
#include <string>

namespace seamtrace {

/// Pipeline stage that raised an error. The numeric value is the CLI exit code.
enum class Stage : int {
    Io = 2,
    InitCurve = 3,
    SeamCut = 4,
    Integrate = 5,
    Metrics = 6,
    Synth = 7,
    Config = 8,
};

const char* stage_name(Stage stage) noexcept;

class Error : public std::runtime_error {
public:
    Error(Stage stage, const std::string& what)
        : std::runtime_error(what), stage_(stage) {}

    Stage stage() const noexcept { return stage_; }
    int exit_code() const noexcept { return static_cast<int>(stage_); }

private:
    Stage stage_;
};

}  // namespace seamtrace
