#include "cli.hpp"

int main(int argc, char** argv) { return sklab::cli::dispatch(argc, argv); }
