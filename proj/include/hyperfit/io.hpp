#ifndef HYPERFIT_IO_HPP
#define HYPERFIT_IO_HPP

#include <filesystem>
#include <string>

#include "hyperfit/sampling.hpp"

namespace hyperfit {

// Labeled-data CSV: I1,I2,J,S11,S22,S33 with an optional F11..F33 tail.
void write_labeled_csv(const std::vector<LabeledSample>& data,
                       const std::filesystem::path& file,
                       const std::vector<DefGrad>* defgrads = nullptr);
std::vector<LabeledSample> read_labeled_csv(const std::filesystem::path& file);

// Per-run manifest recording command, seed, and configuration for
// reproducibility.
void write_manifest(const std::filesystem::path& file, const std::string& command,
                    std::uint64_t seed, const std::string& config_json);

}  // namespace hyperfit

#endif
