#include "tag/cli.hpp"

int main(int argc, char** argv) { return tag::cli::run(argc, argv); }
