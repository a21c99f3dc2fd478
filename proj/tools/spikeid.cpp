#include "spikeid/pipeline.hpp"

int main(int argc, char** argv) { return spikeid::pipeline::run_cli(argc, argv); }
