#include "emdg/eval.hpp"

int main(int argc, char** argv) { return emdg::cli::run(argc, argv); }
