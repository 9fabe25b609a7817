#pragma once

#include <iosfwd>

namespace vpersona {

/// Runs one `vpersona` invocation. Returns 0 on success, 2 on usage errors and
/// 1 on any other failure, after printing "error: <Code>: <message>" to `err`.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace vpersona
