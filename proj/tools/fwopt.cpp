#include "fw/cli_commands.hpp"

int main(int argc, char** argv) { return fw::cli::run_cli(argc, argv); }
