#include "skylut/cli.hpp"

int main(int argc, char** argv) { return skylut::run_cli(argc, argv); }
