#include "virtlev/cli.hpp"

int main(int argc, char** argv) { return virtlev::cli::run(argc, argv); }
