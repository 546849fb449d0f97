#include "hyhtm/cli.hpp"

int main(int argc, char** argv) { return hyhtm::cli::run(argc, argv); }
