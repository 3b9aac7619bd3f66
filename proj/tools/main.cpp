#include "stableforms/cli.hpp"

int main(int argc, char** argv) { return stableforms::cli::run(argc, argv); }
