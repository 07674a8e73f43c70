#include "vinestress/cli.hpp"

int main(int argc, char** argv) { return vinestress::cli::run_cli(argc, argv); }
