#include "kfbi/cli.hpp"

int main(int argc, char** argv) { return kfbi::cli::main_entry(argc, argv); }
