#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace csqe::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kBackendError = 3,
};

/// Entry point of the `csqe` tool. `args` excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csqe::cli
