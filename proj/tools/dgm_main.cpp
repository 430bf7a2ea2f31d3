#include "dgm/cli.h"

int main(int argc, char** argv) { return dgm::run_cli(argc, argv); }
