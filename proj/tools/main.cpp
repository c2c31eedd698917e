#include "cli.hpp"

int main(int argc, char** argv) { return oscillib::cli::run(argc, argv); }
