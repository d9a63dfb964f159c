#include "lipgeo/cli.hpp"

int main(int argc, char** argv) { return lipgeo::cli::run(argc, argv); }
