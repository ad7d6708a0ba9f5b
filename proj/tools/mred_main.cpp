#include "mred/cli.hpp"

int main(int argc, char** argv) { return mred::cli::dispatch(argc, argv); }
