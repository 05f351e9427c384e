#include "cvmp/error.hpp"

namespace cvmp {

void throw_shape_mismatch(const std::string& context, std::size_t expected, std::size_t got) {
  throw DataError(context + ": shape mismatch (expected " + std::to_string(expected) + ", got " +
                  std::to_string(got) + ")");
}

}  // namespace cvmp
