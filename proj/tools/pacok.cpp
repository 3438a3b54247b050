#include "pacok/cli.hpp"

int main(int argc, char** argv) { return pacok::cli::cli_main(argc, argv); }
