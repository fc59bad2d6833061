#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixsdp {

/// Invalid arguments, dimension mismatches, out-of-range values.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text; `line` is 1-based when known, 0 otherwise.
struct parse_error : input_error {
    explicit parse_error(const std::string& msg, std::size_t line_no = 0)
        : input_error(line_no ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
    std::size_t line;
};

} // namespace mixsdp
