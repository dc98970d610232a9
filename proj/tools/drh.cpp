#include "drh/cli.hpp"

int main(int argc, char** argv) { return drh::cli::main(argc, argv); }
