#include "sftrack/cli.hpp"

int main(int argc, char** argv) { return sftrack::cli::run(argc, argv); }
