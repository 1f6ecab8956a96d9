#include "wptrx/cli.hpp"

int main(int argc, char** argv) { return wptrx::run_cli(argc, argv); }
