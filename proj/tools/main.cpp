#include "tbsim/commands.hpp"

int main(int argc, char** argv) { return tbsim::run_cli(argc, argv); }
