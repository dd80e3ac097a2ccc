#include "tae/cli.hpp"

int main(int argc, char** argv) { return tae::cli::run(argc, argv); }
