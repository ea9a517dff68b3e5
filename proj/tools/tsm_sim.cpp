#include <tsm/cli.hpp>

int main(int argc, char** argv) { return tsm::cli::run_main(argc, argv); }
