#include "paraosc/cli.hpp"

int main(int argc, char** argv) { return paraosc::run_cli(argc, argv); }
