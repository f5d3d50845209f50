#include "slice2vec/cli.hpp"

int main(int argc, char** argv) { return s2v::run(argc, argv); }
