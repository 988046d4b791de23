#include "fmlab/cli/app.hpp"

int main(int argc, char** argv) { return fmlab::cli::run(argc, argv); }
