#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qkdc::cli {

// Exit codes: 0 success, 2 argument error, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// args exclude the program name
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker count for sweeps: QKDC_THREADS if set, else hardware concurrency.
unsigned thread_cap();

} // namespace qkdc::cli
