#include "affharm/experiment.hpp"

int main(int argc, char** argv) { return affharm::experiment_main(argc, argv); }
