#include "ofdmsense/io/cli.hpp"

int main(int argc, char** argv) { return ofdmsense::io::run_cli(argc, argv); }
