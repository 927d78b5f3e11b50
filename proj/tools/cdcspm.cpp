#include "cdcspm/cli.hpp"

int main(int argc, char** argv) { return cdcspm::cli::run_cli(argc, argv); }
