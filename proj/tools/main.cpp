#include "hdconc_cli.hpp"

int main(int argc, char** argv) { return hdconc::cli::run(argc, argv); }
