#pragma once

#include <stdexcept>
#include <string>

namespace kirby {

enum class ErrorKind {
    Syntax,      // malformed input text
    Validation,  // structural invariant violated
    Lookup,      // unknown component / edge / rule name
    Site,        // stale or invalid rewrite site
    Delta,       // move violated its expected linking-matrix delta
    Unsupported  // parameter outside configured bounds
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg, int line = 0, int col = 0)
        : std::runtime_error(std::move(msg)), kind(kind), line(line), col(col) {}

    ErrorKind kind;
    int line;
    int col;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg, int line = 0, int col = 0) {
    throw Error(kind, msg, line, col);
}

} // namespace kirby
