#pragma once

// Entry point of the `fairalloc` command-line tool, factored out of main() so
// tests can drive the argument parsing and exit-code contract in-process.
// Returns 0 on success, 2 on configuration errors, 3 on solver failures.
int fairalloc_cli_main(int argc, const char* const* argv);
