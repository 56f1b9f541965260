#include "cli.hpp"

int main(int argc, char** argv) { return occuhmm::cli::run(argc, argv); }
