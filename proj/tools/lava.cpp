#include "lava/cli.hpp"

int main(int argc, char** argv) { return lava::cli_main(argc, argv); }
