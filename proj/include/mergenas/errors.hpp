#pragma once

#include <stdexcept>
#include <string>

namespace mergenas {

// Shape disagreement between tensor operands.
struct dimension_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
struct contract_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// DSL / CSV parse failure with source position.
struct parse_error : std::runtime_error {
  int line = 0;
  int col = 0;
  parse_error(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

// Lookup of a named parameter/embedding that was never initialized.
struct missing_key_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checkpoint container is corrupt or has an unsupported version/layout.
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection-sampling retry budget ran out.
struct exhaustion_error : std::runtime_error {
  long long rejects = 0;
  exhaustion_error(const std::string& msg, long long rejects_)
      : std::runtime_error(msg + " after " + std::to_string(rejects_) +
                           " rejected samples"),
        rejects(rejects_) {}
};

}  // namespace mergenas
