#include "sagr/cli.hpp"

int main(int argc, char** argv) { return sagr::cli_main(argc, argv); }
