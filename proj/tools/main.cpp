#include "qpwalk/cli.hpp"

int main(int argc, char** argv) { return qpwalk::cli::run(argc, argv); }
