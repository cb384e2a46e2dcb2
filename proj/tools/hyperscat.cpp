#include "hyperscat/cli.hpp"

int main(int argc, char** argv) { return hyperscat::cli::run(argc, argv); }
