#include "outbreak/cli.hpp"

int main(int argc, char** argv) { return outbreak::cli::run(argc, argv); }
