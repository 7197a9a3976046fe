#include "bcva/cli.hpp"

int main(int argc, char** argv) { return bcva::parse_and_run(argc, argv, bcva::environment_map()); }
