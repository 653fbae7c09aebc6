#include "divq/cli.hpp"

int main(int argc, char** argv) { return divq::cli::run(argc, argv); }
