#include "oinfo/cli.hpp"

int main(int argc, char** argv) { return oinfo::cli::run(argc, argv); }
