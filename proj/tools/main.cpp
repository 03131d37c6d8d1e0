#include "ehrelay/cli.hpp"

int main(int argc, char** argv) { return ehrelay::cli::main(argc, argv); }
