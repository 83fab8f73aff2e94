#include "triad/cli.hpp"

int main(int argc, char** argv) { return triad::run_cli(argc, argv); }
