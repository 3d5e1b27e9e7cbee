#pragma once

#include <string>
#include <vector>

namespace truncgeo {

// Dispatches the command-line front end. `args` excludes the program name.
// Returns 0 on success, 1 on runtime errors, 2 on configuration/usage errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace truncgeo
