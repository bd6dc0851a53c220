#include "omtopo/cli.hpp"

namespace omtopo {
int run_cli(const std::vector<std::string>&) { return 1; }
}  // namespace omtopo
