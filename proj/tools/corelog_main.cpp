#include "corelog/cli.hpp"

int main(int argc, char** argv) { return corelog::cli::run_cli(argc, argv); }
