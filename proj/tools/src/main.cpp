#include "falcon/cli/commands.hpp"

int main(int argc, char** argv) { return falcon::cli::run_cli(argc, argv); }
