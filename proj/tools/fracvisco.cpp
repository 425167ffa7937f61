#include "fracvisco/cli.hpp"

int main(int argc, char** argv) { return fracvisco::cli::run_cli(argc, argv); }
