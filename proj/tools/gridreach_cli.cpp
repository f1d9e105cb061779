#include "gridreach/cli.hpp"

int main(int argc, char** argv) { return gridreach::cli::run(argc, argv); }
