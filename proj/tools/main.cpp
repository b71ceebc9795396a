#include "beamccs/cli.hpp"

int main(int argc, char** argv) { return beamccs::run_cli(argc, argv); }
