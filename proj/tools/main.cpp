#include "hvp/cli.hpp"

int main(int argc, char** argv) { return hvp::cli::run(argc, argv); }
