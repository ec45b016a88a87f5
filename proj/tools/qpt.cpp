#include "qpt/cli.hpp"

int main(int argc, char** argv) { return qpt::cli::run(argc, argv); }
