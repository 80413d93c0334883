#include "lshmm/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lshmm {

namespace {

using FK = FormatError::Kind;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw InputError("write to '" + path + "' failed");
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

struct Loc {
  const std::string& path;
  std::size_t line;
};

std::uint64_t parse_u64(const std::string& tok, const Loc& loc, std::size_t col,
                        const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw FormatError(FK::bad_value, loc.path, loc.line, col,
                      std::string("expected ") + what + ", got '" + tok + "'");
  return v;
}

double parse_f64(const std::string& tok, const Loc& loc, std::size_t col, const char* what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw FormatError(FK::bad_value, loc.path, loc.line, col,
                      std::string("expected ") + what + ", got '" + tok + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string format_double_full(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, p);
}

ReferencePanel load_panel(const std::string& path) {
  const auto lines = split_lines(read_file(path));
  if (lines.empty())
    throw FormatError(FK::malformed_header, path, 1, 0, "empty file, expected 'REFP v1 H M'");

  const auto head = split_ws(lines[0]);
  if (head.size() != 4 || head[0] != "REFP" || head[1] != "v1")
    throw FormatError(FK::malformed_header, path, 1, 0,
                      "expected 'REFP v1 H M', got '" + lines[0] + "'");
  ReferencePanel panel;
  panel.haplotypes = static_cast<std::uint32_t>(parse_u64(head[2], {path, 1}, 3, "haplotype count"));
  panel.markers = static_cast<std::uint32_t>(parse_u64(head[3], {path, 1}, 4, "marker count"));
  if (panel.haplotypes < 2 || panel.markers < 1)
    throw FormatError(FK::malformed_header, path, 1, 0, "panel must have H >= 2 and M >= 1");

  if (lines.size() < 2)
    throw FormatError(FK::dimension_mismatch, path, 2, 0, "missing distance line");
  const auto dtoks = split_ws(lines[1]);
  if (dtoks.size() != panel.markers)
    throw FormatError(FK::dimension_mismatch, path, 2, 0,
                      "expected " + std::to_string(panel.markers) + " distances, got " +
                          std::to_string(dtoks.size()));
  panel.distances.resize(panel.markers);
  for (std::uint32_t m = 0; m < panel.markers; ++m)
    panel.distances[m] = parse_f64(dtoks[m], {path, 2}, m + 1, "genetic distance");
  if (panel.distances[0] != 0.0)
    throw FormatError(FK::bad_value, path, 2, 1, "first distance must be 0");

  panel.alleles.resize(static_cast<std::size_t>(panel.haplotypes) * panel.markers);
  for (std::uint32_t h = 0; h < panel.haplotypes; ++h) {
    const std::size_t lineno = 3 + h;
    if (lineno - 1 >= lines.size())
      throw FormatError(FK::dimension_mismatch, path, lineno, 0,
                        "expected " + std::to_string(panel.haplotypes) + " haplotype rows, file truncated at row " +
                            std::to_string(h));
    const std::string& row = lines[lineno - 1];
    if (row.size() != panel.markers)
      throw FormatError(FK::dimension_mismatch, path, lineno, 0,
                        "expected " + std::to_string(panel.markers) + " alleles in row, got " +
                            std::to_string(row.size()));
    for (std::uint32_t m = 0; m < panel.markers; ++m) {
      const char c = row[m];
      if (c != '0' && c != '1')
        throw FormatError(FK::unknown_symbol, path, lineno, m + 1,
                          std::string("unknown allele symbol '") + c + "'");
      panel.allele(h, m) = static_cast<Allele>(c - '0');
    }
  }
  return panel;
}

void save_panel(const ReferencePanel& panel, const std::string& path) {
  std::string out;
  out += "REFP v1 " + std::to_string(panel.haplotypes) + " " + std::to_string(panel.markers) + "\n";
  for (std::uint32_t m = 0; m < panel.markers; ++m) {
    if (m) out += ' ';
    out += format_double(panel.distances[m]);
  }
  out += '\n';
  for (std::uint32_t h = 0; h < panel.haplotypes; ++h) {
    for (std::uint32_t m = 0; m < panel.markers; ++m)
      out += static_cast<char>('0' + panel.allele(h, m));
    out += '\n';
  }
  write_file(path, out);
}

std::vector<TargetHaplotype> load_targets(const std::string& path) {
  const auto lines = split_lines(read_file(path));
  std::vector<TargetHaplotype> targets;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto toks = split_ws(lines[li]);
    if (toks.empty()) continue;
    TargetHaplotype t;
    t.id = toks[0];
    t.observations.reserve(toks.size() - 1);
    for (std::size_t k = 1; k < toks.size(); ++k) {
      const std::string& tok = toks[k];
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size())
        throw FormatError(FK::bad_value, path, li + 1, k + 1,
                          "expected marker:allele pair, got '" + tok + "'");
      Observation o;
      o.marker = static_cast<std::uint32_t>(
          parse_u64(tok.substr(0, colon), {path, li + 1}, k + 1, "marker index"));
      const std::string allele_str = tok.substr(colon + 1);
      if (allele_str.size() != 1 || (allele_str[0] != '0' && allele_str[0] != '1'))
        throw FormatError(FK::unknown_symbol, path, li + 1, k + 1,
                          "unknown allele symbol '" + allele_str + "'");
      o.allele = static_cast<Allele>(allele_str[0] - '0');
      if (!t.observations.empty() && o.marker <= t.observations.back().marker)
        throw FormatError(FK::bad_value, path, li + 1, k + 1,
                          "markers must be strictly increasing");
      t.observations.push_back(o);
    }
    targets.push_back(std::move(t));
  }
  return targets;
}

void save_targets(const std::vector<TargetHaplotype>& targets, const std::string& path) {
  std::string out;
  for (const TargetHaplotype& t : targets) {
    if (t.id.empty() || t.id.find_first_of(" \t\n") != std::string::npos)
      throw InputError("target id '" + t.id + "' is empty or contains whitespace");
    out += t.id;
    std::uint32_t prev = 0;
    bool have_prev = false;
    for (const Observation& o : t.observations) {
      if (have_prev && o.marker <= prev)
        throw InputError("target " + t.id + ": markers not strictly increasing");
      prev = o.marker;
      have_prev = true;
      out += ' ';
      out += std::to_string(o.marker);
      out += ':';
      out += static_cast<char>('0' + o.allele);
    }
    out += '\n';
  }
  write_file(path, out);
}

namespace {

const char* source_token(CallSource s) { return to_string(s); }

CallSource parse_source(const std::string& tok, const Loc& loc, std::size_t col) {
  if (tok == "hmm") return CallSource::hmm;
  if (tok == "interpolated") return CallSource::interpolated;
  throw FormatError(FK::bad_value, loc.path, loc.line, col,
                    "unknown call source '" + tok + "'");
}

}  // namespace

ResultFile load_results(const std::string& path) {
  const auto lines = split_lines(read_file(path));
  if (lines.empty())
    throw FormatError(FK::malformed_header, path, 1, 0, "empty file, expected 'IOUT v1 ...'");
  const auto head = split_ws(lines[0]);
  if (head.size() < 2 || head[0] != "IOUT" || head[1] != "v1")
    throw FormatError(FK::malformed_header, path, 1, 0,
                      "expected 'IOUT v1 ...', got '" + lines[0] + "'");

  ResultFile file;
  for (std::size_t k = 2; k < head.size(); ++k) {
    const std::string& tok = head[k];
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos)
      throw FormatError(FK::malformed_header, path, 1, k + 1, "expected key=value, got '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    try {
      if (key == "ne")
        file.header.effective_population_size = parse_f64(val, {path, 1}, k + 1, "ne value");
      else if (key == "e")
        file.header.error_rate = parse_f64(val, {path, 1}, k + 1, "e value");
      else if (key == "mode")
        file.header.mode = parse_mode(val);
      else if (key == "scaling")
        file.header.scaling = parse_scaling(val);
      else if (key == "backend")
        file.header.backend = parse_backend(val);
      else if (key == "seed")
        file.header.seed = parse_u64(val, {path, 1}, k + 1, "seed");
      else
        throw FormatError(FK::malformed_header, path, 1, k + 1, "unknown header key '" + key + "'");
    } catch (const InputError& e) {
      throw FormatError(FK::malformed_header, path, 1, k + 1, e.what());
    }
  }

  std::size_t li = 1;
  while (li < lines.size()) {
    const auto toks = split_ws(lines[li]);
    if (toks.empty()) {
      ++li;
      continue;
    }
    if (toks[0] != "TARGET" || toks.size() != 3)
      throw FormatError(FK::bad_value, path, li + 1, 1,
                        "expected 'TARGET id row_count', got '" + lines[li] + "'");
    ImputationResult res;
    res.target_id = toks[1];
    const std::uint64_t rows = parse_u64(toks[2], {path, li + 1}, 3, "row count");
    ++li;
    res.rows.reserve(rows);
    for (std::uint64_t r = 0; r < rows; ++r, ++li) {
      if (li >= lines.size())
        throw FormatError(FK::dimension_mismatch, path, li + 1, 0,
                          "result block for target " + res.target_id + " truncated");
      const auto rt = split_ws(lines[li]);
      if (rt.size() != 3 + kAlleleCount)
        throw FormatError(FK::dimension_mismatch, path, li + 1, 0,
                          "expected marker, " + std::to_string(kAlleleCount) +
                              " probabilities, call, source");
      ImputationResult::Row row;
      row.marker = static_cast<std::uint32_t>(parse_u64(rt[0], {path, li + 1}, 1, "marker index"));
      for (std::size_t a = 0; a < kAlleleCount; ++a)
        row.probs[a] = parse_f64(rt[1 + a], {path, li + 1}, 2 + a, "probability");
      const std::uint64_t call = parse_u64(rt[1 + kAlleleCount], {path, li + 1}, 2 + kAlleleCount,
                                           "called allele");
      if (call >= kAlleleCount)
        throw FormatError(FK::unknown_symbol, path, li + 1, 2 + kAlleleCount,
                          "called allele outside the alphabet");
      row.call = static_cast<Allele>(call);
      row.source = parse_source(rt[2 + kAlleleCount], {path, li + 1}, 3 + kAlleleCount);
      res.rows.push_back(row);
    }
    file.results.push_back(std::move(res));
  }
  return file;
}

void save_results(const ResultFile& file, const std::string& path) {
  for (const ImputationResult& r : file.results) check_result(r);

  std::string out;
  out += "IOUT v1 ne=" + format_double_full(file.header.effective_population_size) +
         " e=" + format_double_full(file.header.error_rate) +
         " mode=" + to_string(file.header.mode) +
         " scaling=" + to_string(file.header.scaling) +
         " backend=" + to_string(file.header.backend) +
         " seed=" + std::to_string(file.header.seed) + "\n";
  for (const ImputationResult& r : file.results) {
    out += "TARGET " + r.target_id + " " + std::to_string(r.rows.size()) + "\n";
    for (const auto& row : r.rows) {
      out += std::to_string(row.marker);
      for (double p : row.probs) {
        out += ' ';
        out += format_double_full(p);
      }
      out += ' ';
      out += static_cast<char>('0' + row.call);
      out += ' ';
      out += source_token(row.source);
      out += '\n';
    }
  }
  write_file(path, out);
}

}  // namespace lshmm
