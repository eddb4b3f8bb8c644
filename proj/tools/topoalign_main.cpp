#include "topoalign/cli.hpp"

int main(int argc, char** argv) { return topoalign::cli::run_cli(argc, argv); }
