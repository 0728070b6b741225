#include "pmfgn/cli/cli.hpp"

int main(int argc, char** argv) { return pmfgn::cli::main(argc, argv); }
