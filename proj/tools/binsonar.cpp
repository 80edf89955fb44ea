#include "binsonar/cli.hpp"

int main(int argc, char** argv) { return binsonar::cli::run_cli(argc, argv); }
