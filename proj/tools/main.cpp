#include "dfk/cli.hpp"

int main(int argc, char** argv) { return dfk::run_cli(argc, argv); }
