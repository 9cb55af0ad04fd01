#include "frbm/cli.hpp"

int main(int argc, char** argv) { return frbm::dispatch(argc, argv); }
