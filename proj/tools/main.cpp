#include "monolocal/cli.hpp"

int main(int argc, char** argv) { return monolocal::cli::run(argc, argv); }
