#include "cli_app.hpp"

int main(int argc, char** argv) { return fockwitness::cli::run(argc, argv); }
