#include "prefdiff/cli.hpp"

int main(int argc, char** argv) { return prefdiff::run_cli(argc, argv); }
