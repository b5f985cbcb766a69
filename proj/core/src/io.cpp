#include "nmrqsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nmrqsim {

using nlohmann::json;

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string coupling_form_name(CouplingForm f) {
  return f == CouplingForm::SecularZZ ? "secular-zz" : "isotropic";
}

CouplingForm coupling_form_from_name(const std::string& name) {
  if (name == "secular-zz") return CouplingForm::SecularZZ;
  if (name == "isotropic") return CouplingForm::Isotropic;
  throw std::invalid_argument("unknown coupling form '" + name + "'");
}

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw std::invalid_argument(std::string("malformed JSON for ") + what);
  }
  return j;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path.string());
  }
  out << text;
}

std::string matrix_to_json(const ComplexMatrix& m) {
  json j;
  j["dim"] = m.rows();
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j.dump(2) + "\n";
}

ComplexMatrix matrix_from_json(const std::string& text) {
  const json j = parse(text, "matrix");
  const auto dim = j.at("dim").get<Eigen::Index>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (dim <= 0 || static_cast<Eigen::Index>(re.size()) != dim * dim ||
      static_cast<Eigen::Index>(im.size()) != dim * dim) {
    throw std::invalid_argument("matrix JSON: entry counts do not match dim^2");
  }
  ComplexMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto k = static_cast<size_t>(r * dim + c);
      m(r, c) = Complex(re[k].get<double>(), im[k].get<double>());
    }
  }
  return m;
}

std::string molecule_to_json(const Molecule& m) {
  json j;
  j["spins"] = json::array();
  for (const Spin& s : m.spins) {
    j["spins"].push_back({{"label", s.label},
                          {"channel", channel_name(s.channel)},
                          {"offset_hz", s.offset_hz},
                          {"t1_s", s.t1_s},
                          {"t2_s", s.t2_s},
                          {"t2star_s", s.t2star_s}});
  }
  j["couplings"] = json::array();
  for (const Coupling& c : m.couplings) {
    j["couplings"].push_back({{"a", c.spin_a},
                              {"b", c.spin_b},
                              {"j_hz", c.j_hz},
                              {"form", coupling_form_name(c.form)}});
  }
  return j.dump(2) + "\n";
}

Molecule molecule_from_json(const std::string& text) {
  const json j = parse(text, "molecule");
  Molecule m;
  for (const json& s : j.at("spins")) {
    m.spins.push_back(Spin{s.at("label").get<std::string>(),
                           channel_from_name(s.at("channel").get<std::string>()),
                           s.at("offset_hz").get<double>(), s.at("t1_s").get<double>(),
                           s.at("t2_s").get<double>(), s.at("t2star_s").get<double>()});
  }
  for (const json& c : j.at("couplings")) {
    m.couplings.push_back(Coupling{c.at("a").get<std::string>(), c.at("b").get<std::string>(),
                                   c.at("j_hz").get<double>(),
                                   coupling_form_from_name(c.at("form").get<std::string>())});
  }
  m.validate();
  return m;
}

std::string sequence_to_json(const PulseSequence& s) {
  json j = json::array();
  for (const PulseElement& e : s.elements) {
    if (const HardPulse* p = std::get_if<HardPulse>(&e)) {
      j.push_back({{"pulse",
                    {{"target", p->target},
                     {"axis", pulse_axis_name(p->axis)},
                     {"angle_rad", p->angle_rad}}}});
    } else {
      j.push_back({{"delay", {{"duration_s", std::get<Delay>(e).duration_s}}}});
    }
  }
  return j.dump(2) + "\n";
}

PulseSequence sequence_from_json(const std::string& text) {
  const json j = parse(text, "pulse sequence");
  PulseSequence s;
  for (const json& e : j) {
    if (e.contains("pulse")) {
      const json& p = e.at("pulse");
      s.elements.push_back(HardPulse{p.at("target").get<std::string>(),
                                     pulse_axis_from_name(p.at("axis").get<std::string>()),
                                     p.at("angle_rad").get<double>()});
    } else if (e.contains("delay")) {
      s.elements.push_back(Delay{e.at("delay").at("duration_s").get<double>()});
    } else {
      throw std::invalid_argument("pulse sequence JSON: element is neither pulse nor delay");
    }
  }
  return s;
}

std::string circuit_to_json(const Circuit& c) {
  json j;
  j["n_spins"] = c.n_spins;
  j["gates"] = json::array();
  for (const Gate& g : c.gates) {
    if (const RxGate* rx = std::get_if<RxGate>(&g)) {
      j["gates"].push_back({{"type", "rx"}, {"spin", rx->spin}, {"angle_rad", rx->angle_rad}});
    } else if (const RyGate* ry = std::get_if<RyGate>(&g)) {
      j["gates"].push_back({{"type", "ry"}, {"spin", ry->spin}, {"angle_rad", ry->angle_rad}});
    } else if (const RzGate* rz = std::get_if<RzGate>(&g)) {
      j["gates"].push_back({{"type", "rz"}, {"spin", rz->spin}, {"angle_rad", rz->angle_rad}});
    } else {
      const CnotGate& cx = std::get<CnotGate>(g);
      j["gates"].push_back(
          {{"type", "cnot"}, {"control", cx.control}, {"target", cx.target}});
    }
  }
  return j.dump(2) + "\n";
}

Circuit circuit_from_json(const std::string& text) {
  const json j = parse(text, "circuit");
  Circuit c;
  c.n_spins = j.at("n_spins").get<int>();
  for (const json& g : j.at("gates")) {
    const std::string type = g.at("type").get<std::string>();
    if (type == "rx") {
      c.gates.push_back(RxGate{g.at("spin").get<int>(), g.at("angle_rad").get<double>()});
    } else if (type == "ry") {
      c.gates.push_back(RyGate{g.at("spin").get<int>(), g.at("angle_rad").get<double>()});
    } else if (type == "rz") {
      c.gates.push_back(RzGate{g.at("spin").get<int>(), g.at("angle_rad").get<double>()});
    } else if (type == "cnot") {
      c.gates.push_back(CnotGate{g.at("control").get<int>(), g.at("target").get<int>()});
    } else {
      throw std::invalid_argument("circuit JSON: unknown gate type '" + type + "'");
    }
  }
  return c;
}

std::string peaks_to_json(const std::vector<PeakModel>& peaks) {
  json j = json::array();
  for (const PeakModel& p : peaks) {
    j.push_back({{"center_hz", p.center_hz},
                 {"decay_rate_per_s", p.decay_rate_per_s},
                 {"amplitude", p.amplitude},
                 {"phase_rad", p.phase_rad}});
  }
  return j.dump(2) + "\n";
}

std::vector<PeakModel> peaks_from_json(const std::string& text) {
  const json j = parse(text, "peak models");
  std::vector<PeakModel> peaks;
  for (const json& p : j) {
    peaks.push_back(PeakModel{p.at("center_hz").get<double>(),
                              p.at("decay_rate_per_s").get<double>(),
                              p.at("amplitude").get<double>(),
                              p.at("phase_rad").get<double>()});
  }
  return peaks;
}

std::string extraction_to_json(const ExtractionReport& report) {
  json j;
  j["input_eigenvalues"] =
      std::vector<double>(report.input_eigenvalues.data(),
                          report.input_eigenvalues.data() + report.input_eigenvalues.size());
  j["reference_eigenvalues"] = std::vector<double>(
      report.reference_eigenvalues.data(),
      report.reference_eigenvalues.data() + report.reference_eigenvalues.size());
  j["max_mismatch"] = report.max_mismatch;
  j["selected_rank"] = report.selected_rank;
  j["selected_eigenvalue"] = report.selected_eigenvalue;
  j["extracted_state"] = json::parse(matrix_to_json(report.extracted_state));
  return j.dump(2) + "\n";
}

namespace {

void write_csv(const std::filesystem::path& path, const std::vector<Complex>& values) {
  std::ostringstream out;
  out << "index,re,im\n";
  for (size_t i = 0; i < values.size(); ++i) {
    out << i << ',' << format_double(values[i].real()) << ','
        << format_double(values[i].imag()) << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<Complex> read_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<Complex> values;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    if (line.empty()) continue;
    size_t c1 = line.find(',');
    size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::invalid_argument(path.string() + ": malformed CSV at line " +
                                  std::to_string(line_no));
    }
    try {
      const double re = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      const double im = std::stod(line.substr(c2 + 1));
      values.emplace_back(re, im);
    } catch (const std::exception&) {
      throw std::invalid_argument(path.string() + ": malformed CSV at line " +
                                  std::to_string(line_no));
    }
  }
  return values;
}

}  // namespace

void write_fid(const std::filesystem::path& csv_path, const Fid& fid) {
  write_csv(csv_path, fid.samples);
  json meta;
  meta["kind"] = "fid";
  meta["channel"] = channel_name(fid.channel);
  meta["dwell_s"] = fid.dwell_s;
  meta["n_samples"] = fid.samples.size();
  write_text_file(sidecar_path(csv_path), meta.dump(2) + "\n");
}

Fid read_fid(const std::filesystem::path& csv_path) {
  const json meta = parse(read_text_file(sidecar_path(csv_path)), "fid metadata");
  if (meta.at("kind").get<std::string>() != "fid") {
    throw std::invalid_argument(csv_path.string() + ": metadata does not describe a FID");
  }
  Fid fid;
  fid.channel = channel_from_name(meta.at("channel").get<std::string>());
  fid.dwell_s = meta.at("dwell_s").get<double>();
  fid.samples = read_csv(csv_path);
  return fid;
}

void write_spectrum(const std::filesystem::path& csv_path, const Spectrum& spec,
                    Channel channel) {
  write_csv(csv_path, spec.amps);
  json meta;
  meta["kind"] = "spectrum";
  meta["channel"] = channel_name(channel);
  meta["freq_start_hz"] = spec.freqs_hz.empty() ? 0.0 : spec.freqs_hz.front();
  meta["freq_step_hz"] =
      spec.freqs_hz.size() > 1 ? spec.freqs_hz[1] - spec.freqs_hz[0] : 0.0;
  meta["n_samples"] = spec.amps.size();
  write_text_file(sidecar_path(csv_path), meta.dump(2) + "\n");
}

Spectrum read_spectrum(const std::filesystem::path& csv_path) {
  const json meta = parse(read_text_file(sidecar_path(csv_path)), "spectrum metadata");
  if (meta.at("kind").get<std::string>() != "spectrum") {
    throw std::invalid_argument(csv_path.string() +
                                ": metadata does not describe a spectrum");
  }
  Spectrum spec;
  spec.amps = read_csv(csv_path);
  const double start = meta.at("freq_start_hz").get<double>();
  const double step = meta.at("freq_step_hz").get<double>();
  spec.freqs_hz.resize(spec.amps.size());
  for (size_t i = 0; i < spec.freqs_hz.size(); ++i) {
    spec.freqs_hz[i] = start + step * static_cast<double>(i);
  }
  return spec;
}

}  // namespace nmrqsim
