#include "ergmpool/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ergmpool/errors.hpp"

namespace ergmpool {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return trim(pos == std::string::npos ? std::string_view(line)
                                       : std::string_view(line).substr(0, pos));
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  return in;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<fs::path> edge_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".edges")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Graph read_edge_list(const fs::path& file) {
  auto in = open_in(file);
  const std::string name = file.string();
  std::string line;
  std::size_t lineno = 0;
  std::optional<Graph> g;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip_comment(line);
    if (body.empty()) continue;
    if (!g) {
      std::size_t n = 0;
      if (body.rfind("n=", 0) != 0 || !parse_number(trim(body.substr(2)), n) || n == 0) {
        throw ParseError(name, lineno, "expected header 'n=<int>' with n >= 1");
      }
      g.emplace(n);
      continue;
    }
    const auto tok = split_ws(body);
    std::size_t i = 0;
    std::size_t j = 0;
    if (tok.size() != 2 || !parse_number(tok[0], i) || !parse_number(tok[1], j)) {
      throw ParseError(name, lineno, "expected 'i<TAB>j', got '" + body + "'");
    }
    if (i >= g->order() || j >= g->order()) {
      throw ParseError(name, lineno,
                       "vertex index out of range for n=" + std::to_string(g->order()));
    }
    if (i == j) throw ParseError(name, lineno, "self-loop on vertex " + std::to_string(i));
    g->set_edge(i, j, true);
  }
  if (!g) throw ParseError(name, lineno, "missing header 'n=<int>'");
  return std::move(*g);
}

void write_edge_list(const Graph& g, const fs::path& file) {
  auto out = open_out(file);
  out << "n=" << g.order() << '\n';
  for (const auto& d : g.edges()) out << d.i << '\t' << d.j << '\n';
}

SupportConstraint read_constraint(const fs::path& file, std::size_t n) {
  SupportConstraint c(n);
  auto in = open_in(file);
  const std::string name = file.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip_comment(line);
    if (body.empty()) continue;
    const auto tok = split_ws(body);
    std::size_t i = 0;
    std::size_t j = 0;
    if (tok.size() != 3 || (tok[0] != "+" && tok[0] != "-") || !parse_number(tok[1], i) ||
        !parse_number(tok[2], j)) {
      throw ParseError(name, lineno, "expected '+ i j' or '- i j', got '" + body + "'");
    }
    if (i >= n || j >= n || i == j) {
      throw ParseError(name, lineno, "invalid dyad for n=" + std::to_string(n));
    }
    try {
      if (tok[0] == "+")
        c.fix_present(i, j);
      else
        c.fix_absent(i, j);
    } catch (const ConstraintError& e) {
      throw ParseError(name, lineno, e.what());
    }
  }
  return c;
}

CovariateSet read_covariates(const fs::path& dir, std::size_t n) {
  CovariateSet cov(n);
  const fs::path nodes = dir / "nodes.csv";
  if (fs::exists(nodes)) {
    auto in = open_in(nodes);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> columns;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto fields = split_csv(line);
      if (header.empty()) {
        header = std::move(fields);
        columns.resize(header.size());
        continue;
      }
      if (fields.size() != header.size()) {
        throw ParseError(nodes.string(), lineno,
                         "expected " + std::to_string(header.size()) + " fields");
      }
      for (std::size_t c = 0; c < fields.size(); ++c) columns[c].push_back(std::move(fields[c]));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (columns[c].size() != n) {
        throw DimensionError(nodes.string() + ": covariate '" + header[c] + "' has " +
                             std::to_string(columns[c].size()) + " rows, expected n=" +
                             std::to_string(n));
      }
      cov.add_nodal(header[c], std::move(columns[c]));
    }
  }
  if (fs::is_directory(dir)) {
    std::vector<fs::path> mats;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".mat")
        mats.push_back(entry.path());
    std::sort(mats.begin(), mats.end());
    for (const auto& file : mats) {
      auto in = open_in(file);
      std::vector<double> values;
      std::string tok;
      while (in >> tok) {
        double x = 0.0;
        if (!parse_number(tok, x)) {
          throw ParseError(file.string(), 0, "non-numeric matrix entry '" + tok + "'");
        }
        values.push_back(x);
      }
      if (values.size() != n * n) {
        throw DimensionError(file.string() + ": matrix has " + std::to_string(values.size()) +
                             " entries, expected " + std::to_string(n * n));
      }
      cov.add_dyadic(file.stem().string(), std::move(values));
    }
  }
  return cov;
}

std::optional<std::size_t> peek_order(const fs::path& dir) {
  auto files = edge_files(dir);
  if (files.empty()) return std::nullopt;
  return read_edge_list(files.front()).order();
}

GraphSet read_graph_set(const fs::path& dir) {
  const auto files = edge_files(dir);
  if (files.empty()) throw IoError("no *.edges files in " + dir.string());
  std::vector<Graph> graphs;
  graphs.reserve(files.size());
  for (const auto& f : files) graphs.push_back(read_edge_list(f));
  const std::size_t n = graphs.front().order();
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    if (graphs[k].order() != n) {
      throw DimensionError(files[k].string() + ": order " + std::to_string(graphs[k].order()) +
                           " differs from " + std::to_string(n));
    }
  }
  CovariateSet cov = read_covariates(dir, n);
  SupportConstraint constraint(n);
  const fs::path cfile = dir / "constraints.txt";
  if (fs::exists(cfile)) constraint = read_constraint(cfile, n);
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    if (!constraint.admits(graphs[k])) {
      throw ConstraintError(files[k].string() + " contradicts " + cfile.string());
    }
  }
  return GraphSet(std::move(graphs), std::move(cov), std::move(constraint));
}

void write_covariates(const CovariateSet& cov, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& nodal = cov.nodal_all();
  if (!nodal.empty()) {
    auto out = open_out(dir / "nodes.csv");
    bool first = true;
    for (const auto& [name, c] : nodal) {
      out << (first ? "" : ",") << name;
      first = false;
    }
    out << '\n';
    for (std::size_t v = 0; v < cov.order(); ++v) {
      first = true;
      for (const auto& [name, c] : nodal) {
        out << (first ? "" : ",") << c.values[v];
        first = false;
      }
      out << '\n';
    }
  }
  for (const auto& [name, m] : cov.dyadic_all()) {
    auto out = open_out(dir / (name + ".mat"));
    const std::size_t n = cov.order();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out << (j ? " " : "") << format_double(m[i * n + j]);
      out << '\n';
    }
  }
}

void write_constraint(const SupportConstraint& c, const fs::path& file) {
  auto out = open_out(file);
  for (const auto& d : c.fixed_present()) out << "+ " << d.i << ' ' << d.j << '\n';
  for (const auto& d : c.fixed_absent()) out << "- " << d.i << ' ' << d.j << '\n';
}

void write_graph_set(const GraphSet& set, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < set.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "graph_%03zu.edges", k);
    write_edge_list(set[k], dir / name);
  }
  write_covariates(set.covariates(), dir);
  if (!set.constraint().empty()) write_constraint(set.constraint(), dir / "constraints.txt");
}

}  // namespace ergmpool
