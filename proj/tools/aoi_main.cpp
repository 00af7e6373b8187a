#include "aoi/cli.hpp"

int main(int argc, char** argv) { return aoi::cli_main(argc, argv); }
