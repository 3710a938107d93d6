#include "cli.hpp"

int main(int argc, char** argv) { return colorwai::cli::run_cli(argc, argv); }
