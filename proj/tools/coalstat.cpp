#include "coalstat/cli.hpp"

int main(int argc, char** argv) { return coalstat::main_entry(argc, argv); }
