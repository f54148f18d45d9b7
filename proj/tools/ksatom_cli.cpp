#include "ksatom/cli/app.hpp"

int main(int argc, char** argv) { return ksatom::cli::run(argc, argv); }
