#include "entlab/cli.hpp"

int main(int argc, char** argv) { return entlab::run_cli(argc, argv); }
