#include "strawkit/cli.hpp"

int main(int argc, char** argv) { return strawkit::cli::main(argc, argv); }
