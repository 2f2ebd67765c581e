#include "tmids/cli.hpp"

int main(int argc, char** argv) { return tmids::run_cli(argc, argv); }
