#include "gravalign/cli.hpp"

int main(int argc, char** argv) { return gravalign::run_cli(argc, argv); }
