#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bhd/error.hpp"
#include "bhd/rf_network.hpp"

namespace bhd::rf {

namespace {

enum class DataFormat { MA, DB, RI };

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

double parse_number(std::string_view tok, std::size_t line) {
  double v = 0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  return v;
}

Complex to_complex(double a, double b, DataFormat fmt) {
  const double rad = b * std::numbers::pi / 180.0;
  switch (fmt) {
    case DataFormat::RI: return {a, b};
    case DataFormat::MA: return std::polar(a, rad);
    case DataFormat::DB: return std::polar(std::pow(10.0, a / 20.0), rad);
  }
  return {};
}

}  // namespace

TwoPortNetwork parse_touchstone(std::string_view text) {
  double freq_scale = 1e9;
  DataFormat fmt = DataFormat::MA;
  double z_ref = 50.0;
  bool have_options = false;
  bool in_noise_block = false;

  std::vector<double> freqs;
  std::vector<SMatrix> mats;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (const auto bang = line.find('!'); bang != std::string_view::npos) line = line.substr(0, bang);
    const auto tokens = split_ws(line);
    if (tokens.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    if (tokens.front().front() == '[')
      throw ParseError("Touchstone v2 keyword " + std::string(tokens.front()) + " is not supported (v1 only)", line_no);

    if (tokens.front().front() == '#') {
      if (have_options) continue;  // only the first option line counts
      have_options = true;
      std::vector<std::string> opts;
      if (tokens.front().size() > 1) opts.push_back(upper(tokens.front().substr(1)));
      for (std::size_t i = 1; i < tokens.size(); ++i) opts.push_back(upper(tokens[i]));
      for (std::size_t i = 0; i < opts.size(); ++i) {
        const std::string& o = opts[i];
        if (o == "HZ") freq_scale = 1.0;
        else if (o == "KHZ") freq_scale = 1e3;
        else if (o == "MHZ") freq_scale = 1e6;
        else if (o == "GHZ") freq_scale = 1e9;
        else if (o == "S") {
        } else if (o == "Y" || o == "Z" || o == "H" || o == "G")
          throw ParseError("only S-parameter files are supported (got " + o + ")", line_no);
        else if (o == "MA") fmt = DataFormat::MA;
        else if (o == "DB") fmt = DataFormat::DB;
        else if (o == "RI") fmt = DataFormat::RI;
        else if (o == "R") {
          if (i + 1 >= opts.size()) throw ParseError("option line: R without impedance", line_no);
          z_ref = parse_number(opts[++i], line_no);
          if (!(z_ref > 0)) throw ParseError("option line: reference impedance must be > 0", line_no);
        } else
          throw ParseError("option line: unrecognised token '" + o + "'", line_no);
      }
      continue;
    }

    if (!have_options) throw ParseError("data before option line", line_no);

    std::vector<double> v;
    v.reserve(tokens.size());
    for (auto tok : tokens) v.push_back(parse_number(tok, line_no));
    const double f = v.front() * freq_scale;

    if (!in_noise_block && v.size() == 5 && !freqs.empty() && f <= freqs.back()) in_noise_block = true;
    if (in_noise_block) {
      if (v.size() != 5) throw ParseError("noise parameter rows need 5 columns", line_no);
      continue;
    }
    if (v.size() != 9)
      throw ParseError("two-port data rows need 9 columns, got " + std::to_string(v.size()), line_no);
    if (!(f > 0)) throw ParseError("frequencies must be > 0", line_no);
    if (!freqs.empty() && !(f > freqs.back())) throw ParseError("frequencies must be strictly increasing", line_no);

    freqs.push_back(f);
    // Column order: S11 S21 S12 S22.
    mats.push_back({to_complex(v[1], v[2], fmt), to_complex(v[5], v[6], fmt), to_complex(v[3], v[4], fmt),
                    to_complex(v[7], v[8], fmt)});
    if (eol == text.size()) break;
  }

  if (!have_options) throw ParseError("missing option line", 0);
  if (freqs.empty()) throw ParseError("no network data", 0);
  TwoPortNetwork n{FrequencySweep(std::move(freqs)), std::move(mats), z_ref};
  n.validate();
  return n;
}

TwoPortNetwork read_touchstone(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_touchstone(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string write_touchstone(const TwoPortNetwork& n) {
  n.validate();
  std::ostringstream os;
  os.precision(17);
  os << "! two-port S-parameters\n# Hz S RI R " << n.z_ref << '\n';
  for (std::size_t i = 0; i < n.s.size(); ++i) {
    const SMatrix& s = n.s[i];
    os << n.sweep[i];
    for (Complex z : {s.s11, s.s21, s.s12, s.s22}) os << ' ' << z.real() << ' ' << z.imag();
    os << '\n';
  }
  return os.str();
}

}  // namespace bhd::rf
