#include "dep/cli.hpp"

int main(int argc, char** argv) { return dep::run_cli(argc, argv); }
