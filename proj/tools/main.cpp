#include "omtopo/cli.hpp"

int main(int argc, char** argv) {
  return omtopo::run_cli({argv + 1, argv + argc});
}
