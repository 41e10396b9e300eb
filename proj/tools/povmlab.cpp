#include "povmlab/cli.hpp"

int main(int argc, char** argv) { return povmlab::cli::run(argc, argv); }
