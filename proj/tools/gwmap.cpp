#include "gwmap/cli.hpp"

int main(int argc, char** argv) {
    return gwmap::cli_main(argc, argv);
}
