#include "hyperfit/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hyperfit {

void write_labeled_csv(const std::vector<LabeledSample>& data,
                       const std::filesystem::path& file,
                       const std::vector<DefGrad>* defgrads) {
  if (defgrads && defgrads->size() != data.size())
    throw std::invalid_argument("defgrad count does not match sample count");
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write data CSV: " + file.string());
  out.precision(17);
  out << "I1,I2,J,S11,S22,S33";
  if (defgrads)
    out << ",F11,F12,F13,F21,F22,F23,F31,F32,F33";
  out << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data[i];
    out << s.t.i1 << ',' << s.t.i2 << ',' << s.t.j << ',' << s.s_diag[0] << ','
        << s.s_diag[1] << ',' << s.s_diag[2];
    if (defgrads) {
      const DefGrad& f = (*defgrads)[i];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out << ',' << f(r, c);
    }
    out << "\n";
  }
}

std::vector<LabeledSample> read_labeled_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open data CSV: " + file.string());
  std::vector<LabeledSample> data;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 6) throw std::runtime_error("malformed data row: " + line);
    data.push_back({{vals[0], vals[1], vals[2]}, {vals[3], vals[4], vals[5]}});
  }
  return data;
}

void write_manifest(const std::filesystem::path& file, const std::string& command,
                    std::uint64_t seed, const std::string& config_json) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config_json.empty() ? nlohmann::json::object()
                                    : nlohmann::json::parse(config_json);
  j["config_hash"] = std::hash<std::string>{}(command + config_json +
                                              std::to_string(seed));
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write manifest: " + file.string());
  out << j.dump(2) << "\n";
}

}  // namespace hyperfit
