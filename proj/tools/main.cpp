#include "epitrack/experiments.hpp"

int main(int argc, char** argv) { return epitrack::cli_main(argc, argv); }
