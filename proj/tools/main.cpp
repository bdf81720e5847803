#include "cli_main.hpp"

int main(int argc, char** argv) { return fairalloc_cli_main(argc, argv); }
