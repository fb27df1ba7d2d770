#include "xbound/cli.hpp"

int main(int argc, char** argv) { return xbound::cli::run(argc, argv); }
