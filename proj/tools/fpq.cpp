#include "fpqubit/cli/commands.hpp"

int main(int argc, char** argv) { return fpq::cli::run(argc, argv); }
