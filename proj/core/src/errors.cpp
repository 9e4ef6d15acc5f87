#include "bufsim/errors.hpp"

#include <utility>

namespace bufsim {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      line_(line)
{
}

IoError::IoError(std::string path, const std::string& what)
    : std::runtime_error(path + ": " + what), path_(std::move(path))
{
}

}  // namespace bufsim
