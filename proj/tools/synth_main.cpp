#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ecgseg/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic 12-lead test dataset in the interchange "
                 "format (records + manifest)"};
    std::string out_dir;
    int patients = ecgseg::kPopulationSize;
    std::uint64_t seed = 1;
    app.add_option("out", out_dir, "dataset directory to create")->required();
    app.add_option("--patients", patients, "number of patients");
    app.add_option("--seed", seed, "generator seed")->envname("ECGSEG_SEED");
    CLI11_PARSE(app, argc, argv);

    try {
        ecgseg::SynthConfig cfg;
        cfg.patients = patients;
        cfg.seed = seed;
        ecgseg::generate_dataset(out_dir, cfg);
        std::cout << "wrote " << patients << " records to " << out_dir << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
