#include "dssp/cli.hpp"

int main(int argc, char** argv) { return dssp::cli_main(argc, argv); }
