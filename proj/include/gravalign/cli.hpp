#pragma once

#include <iostream>

namespace gravalign {

/// Entry point of the `gravalign` tool. Returns 0 on success, 1 on usage
/// errors and 2 when the computation fails.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace gravalign
