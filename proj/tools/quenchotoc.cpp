#include "quenchotoc/cli.hpp"

int main(int argc, char** argv) { return quenchotoc::run_cli(argc, argv); }
