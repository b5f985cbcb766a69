#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nmrqsim/circuits.hpp"
#include "nmrqsim/molecule.hpp"
#include "nmrqsim/pulse.hpp"
#include "nmrqsim/qops.hpp"
#include "nmrqsim/readout.hpp"
#include "nmrqsim/thermal.hpp"

// Serialization for every on-disk format. All emitters are deterministic
// (sorted keys, round-trip float formatting), so identical inputs produce
// byte-identical files.
namespace nmrqsim {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Matrices: { "dim": n, "re": [row-major], "im": [row-major] }.
std::string matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const std::string& text);

std::string molecule_to_json(const Molecule& m);
Molecule molecule_from_json(const std::string& text);

// Ordered array of {"pulse": {...}} | {"delay": {...}} elements.
std::string sequence_to_json(const PulseSequence& s);
PulseSequence sequence_from_json(const std::string& text);

std::string circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const std::string& text);

std::string peaks_to_json(const std::vector<PeakModel>& peaks);
std::vector<PeakModel> peaks_from_json(const std::string& text);

std::string extraction_to_json(const ExtractionReport& report);

// FID / spectrum CSV: a header row, then "index,re,im" lines. Grid metadata
// lives in a sidecar JSON next to the CSV (<file>.meta.json).
void write_fid(const std::filesystem::path& csv_path, const Fid& fid);
Fid read_fid(const std::filesystem::path& csv_path);
void write_spectrum(const std::filesystem::path& csv_path, const Spectrum& spec,
                    Channel channel);
Spectrum read_spectrum(const std::filesystem::path& csv_path);

}  // namespace nmrqsim
