#include "commands.hpp"

int main(int argc, char** argv) { return ikd::cli::run_cli(argc, argv); }
