#include "commands.hpp"

int main(int argc, char** argv) { return arraycav::cli::run(argc, argv); }
