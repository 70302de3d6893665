#include "tbdfs/cli.hpp"

int main(int argc, char** argv) { return tbdfs::run_cli(argc, argv); }
