#include "qds/cli/run.hpp"

int main(int argc, char** argv) { return qds::cli::run_cli(argc, argv); }
