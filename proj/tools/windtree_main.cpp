#include "windtree/io.hpp"

int main(int argc, char** argv) { return windtree::run_cli(argc, argv); }
