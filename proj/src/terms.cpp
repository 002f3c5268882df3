#include "ergmpool/terms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ergmpool/errors.hpp"

namespace ergmpool {

namespace {

std::string format_decay(double d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, ptr);
}

std::string keyword(TermKind kind) {
  switch (kind) {
    case TermKind::Edges: return "edges";
    case TermKind::Gwesp: return "gwesp";
    case TermKind::Nodematch: return "nodematch";
    case TermKind::Nodemix: return "nodemix";
    case TermKind::Nodecov: return "nodecov";
    case TermKind::Edgecov: return "edgecov";
    case TermKind::TwoStars: return "twostars";
    case TermKind::Triangles: return "triangles";
    case TermKind::OpenTwoPaths: return "opentwopaths";
  }
  return "?";
}

}  // namespace

TermSpec TermSpec::gwesp(double decay) {
  if (!(decay > 0.0) || !std::isfinite(decay)) {
    throw ModelError("gwesp decay must be a positive finite number, got " + format_decay(decay));
  }
  TermSpec t = of(TermKind::Gwesp);
  t.decay = decay;
  return t;
}

TermSpec TermSpec::nodematch(std::string cov) {
  TermSpec t = of(TermKind::Nodematch);
  t.covariate = std::move(cov);
  return t;
}

TermSpec TermSpec::nodemix(std::string cov, std::string a, std::string b) {
  TermSpec t = of(TermKind::Nodemix);
  t.covariate = std::move(cov);
  if (b < a) std::swap(a, b);
  t.level_a = std::move(a);
  t.level_b = std::move(b);
  return t;
}

TermSpec TermSpec::nodecov(std::string cov) {
  TermSpec t = of(TermKind::Nodecov);
  t.covariate = std::move(cov);
  return t;
}

TermSpec TermSpec::edgecov(std::string cov) {
  TermSpec t = of(TermKind::Edgecov);
  t.covariate = std::move(cov);
  return t;
}

std::string TermSpec::label() const {
  switch (kind) {
    case TermKind::Gwesp: return "gwesp." + format_decay(decay);
    case TermKind::Nodemix: return "nodemix." + covariate + "." + level_a + "." + level_b;
    case TermKind::Nodematch:
    case TermKind::Nodecov:
    case TermKind::Edgecov: return keyword(kind) + "." + covariate;
    default: return keyword(kind);
  }
}

std::string TermSpec::canonical() const {
  switch (kind) {
    case TermKind::Gwesp: return "gwesp " + format_decay(decay);
    case TermKind::Nodemix: return "nodemix " + covariate + " " + level_a + " " + level_b;
    case TermKind::Nodematch:
    case TermKind::Nodecov:
    case TermKind::Edgecov: return keyword(kind) + " " + covariate;
    default: return keyword(kind);
  }
}

bool TermSpec::dyad_independent() const {
  switch (kind) {
    case TermKind::Gwesp:
    case TermKind::TwoStars:
    case TermKind::Triangles:
    case TermKind::OpenTwoPaths: return false;
    default: return true;
  }
}

ModelSpec::ModelSpec(std::vector<TermSpec> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw ModelError("model has no terms");
  for (std::size_t a = 0; a < terms_.size(); ++a) {
    for (std::size_t b = a + 1; b < terms_.size(); ++b) {
      if (terms_[a] == terms_[b]) {
        throw ModelError("duplicate term '" + terms_[a].label() + "' at positions " +
                         std::to_string(a) + " and " + std::to_string(b));
      }
    }
  }
}

ModelSpec ModelSpec::parse(std::string_view text, const std::string& source) {
  std::vector<TermSpec> terms;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string s; ls >> s;) tok.push_back(s);
    if (tok.empty()) continue;
    std::string kw = tok[0];
    std::transform(kw.begin(), kw.end(), kw.begin(), [](unsigned char c) { return std::tolower(c); });
    auto want = [&](std::size_t k) {
      if (tok.size() != k + 1) {
        throw ParseError(source, lineno,
                         "'" + kw + "' takes " + std::to_string(k) + " argument(s)");
      }
    };
    try {
      if (kw == "edges") {
        want(0);
        terms.push_back(TermSpec::edges());
      } else if (kw == "gwesp") {
        want(1);
        double d = 0.0;
        auto [ptr, ec] = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), d);
        if (ec != std::errc{} || ptr != tok[1].data() + tok[1].size()) {
          throw ParseError(source, lineno, "gwesp decay '" + tok[1] + "' is not a number");
        }
        terms.push_back(TermSpec::gwesp(d));
      } else if (kw == "nodematch") {
        want(1);
        terms.push_back(TermSpec::nodematch(tok[1]));
      } else if (kw == "nodemix") {
        want(3);
        terms.push_back(TermSpec::nodemix(tok[1], tok[2], tok[3]));
      } else if (kw == "nodecov") {
        want(1);
        terms.push_back(TermSpec::nodecov(tok[1]));
      } else if (kw == "edgecov") {
        want(1);
        terms.push_back(TermSpec::edgecov(tok[1]));
      } else if (kw == "twostars" || (kw == "kstar" && tok.size() == 2 && tok[1] == "2")) {
        terms.push_back(TermSpec::two_stars());
      } else if (kw == "triangles" || kw == "triangle") {
        want(0);
        terms.push_back(TermSpec::triangles());
      } else if (kw == "opentwopaths" ||
                 (kw == "graphletcount" && tok.size() == 2 && tok[1] == "1")) {
        terms.push_back(TermSpec::open_two_paths());
      } else {
        throw ParseError(source, lineno, "unknown term '" + tok[0] + "'");
      }
    } catch (const ModelError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return ModelSpec(std::move(terms));
}

ModelSpec ModelSpec::read(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open model file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), file.string());
}

std::vector<std::string> ModelSpec::labels() const {
  std::vector<std::string> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.label());
  return out;
}

std::string ModelSpec::canonical() const {
  std::string out;
  for (const auto& t : terms_) out += t.canonical() + "\n";
  return out;
}

std::string ModelSpec::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_string(StatLabel label) {
  switch (label) {
    case StatLabel::Observed: return "observed";
    case StatLabel::Mean: return "mean";
    case StatLabel::Prior: return "prior";
    case StatLabel::Target: return "target";
    case StatLabel::Simulated: return "simulated";
  }
  return "?";
}

BoundModel::BoundModel(ModelSpec spec, const CovariateSet& cov)
    : spec_(std::move(spec)), n_(cov.order()) {
  for (const auto& ts : spec_.terms()) {
    Term t;
    t.kind = ts.kind;
    switch (ts.kind) {
      case TermKind::Gwesp: {
        const double r = 1.0 - std::exp(-ts.decay);
        const double scale = std::exp(ts.decay);
        t.weight.resize(n_ + 1);
        t.ratio.resize(n_ + 1);
        double rk = 1.0;
        for (std::size_t k = 0; k <= n_; ++k) {
          t.ratio[k] = rk;
          t.weight[k] = scale * (1.0 - rk);
          rk *= r;
        }
        break;
      }
      case TermKind::Nodematch:
      case TermKind::Nodemix: {
        const auto& c = cov.nodal(ts.covariate);
        std::vector<std::string> levels(c.values.begin(), c.values.end());
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        auto code = [&](const std::string& v) {
          return static_cast<int>(std::lower_bound(levels.begin(), levels.end(), v) -
                                  levels.begin());
        };
        t.codes.reserve(n_);
        for (const auto& v : c.values) t.codes.push_back(code(v));
        if (ts.kind == TermKind::Nodemix) {
          for (const auto* lv : {&ts.level_a, &ts.level_b}) {
            if (!std::binary_search(levels.begin(), levels.end(), *lv)) {
              throw ModelError("nodemix: level '" + *lv + "' not observed in covariate '" +
                               ts.covariate + "'");
            }
          }
          t.level_a = code(ts.level_a);
          t.level_b = code(ts.level_b);
        }
        break;
      }
      case TermKind::Nodecov: {
        const auto& c = cov.nodal(ts.covariate);
        if (!c.numeric) {
          throw ModelError("nodecov: covariate '" + ts.covariate + "' is not numeric");
        }
        t.values = *c.numeric;
        break;
      }
      case TermKind::Edgecov: t.values = cov.dyadic(ts.covariate); break;
      default: break;
    }
    terms_.push_back(std::move(t));
  }
}

double BoundModel::dyad_value(const Term& t, Vertex i, Vertex j) const {
  switch (t.kind) {
    case TermKind::Edges: return 1.0;
    case TermKind::Nodematch: return t.codes[i] == t.codes[j] ? 1.0 : 0.0;
    case TermKind::Nodemix: {
      const int a = t.codes[i];
      const int b = t.codes[j];
      return (a == t.level_a && b == t.level_b) || (a == t.level_b && b == t.level_a) ? 1.0 : 0.0;
    }
    case TermKind::Nodecov: return t.values[i] + t.values[j];
    case TermKind::Edgecov: return t.values[i * n_ + j];
    default: return 0.0;
  }
}

Eigen::VectorXd BoundModel::statistics(const Graph& g) const {
  if (g.order() != n_) {
    throw DimensionError("graph of order " + std::to_string(g.order()) +
                         " evaluated against covariates of order " + std::to_string(n_));
  }
  const auto edges = g.edges();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(terms_.size()));
  double two_stars = -1.0;
  double triangles = -1.0;
  auto count_two_stars = [&] {
    if (two_stars < 0) {
      two_stars = 0;
      for (Vertex v = 0; v < n_; ++v) {
        const double d = static_cast<double>(g.degree(v));
        two_stars += d * (d - 1) / 2;
      }
    }
    return two_stars;
  };
  auto count_triangles = [&] {
    if (triangles < 0) {
      std::size_t t3 = 0;
      for (const auto& e : edges) t3 += g.common_neighbors(e.i, e.j);
      triangles = static_cast<double>(t3 / 3);
    }
    return triangles;
  };
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const Term& t = terms_[k];
    double s = 0.0;
    switch (t.kind) {
      case TermKind::Edges: s = static_cast<double>(edges.size()); break;
      case TermKind::TwoStars: s = count_two_stars(); break;
      case TermKind::Triangles: s = count_triangles(); break;
      case TermKind::OpenTwoPaths: s = count_two_stars() - 3 * count_triangles(); break;
      case TermKind::Gwesp: {
        std::vector<std::size_t> hist(n_ + 1, 0);
        for (const auto& e : edges) ++hist[g.common_neighbors(e.i, e.j)];
        for (std::size_t c = 1; c <= n_; ++c) s += t.weight[c] * static_cast<double>(hist[c]);
        break;
      }
      default:
        for (const auto& e : edges) s += dyad_value(t, e.i, e.j);
        break;
    }
    out[static_cast<Eigen::Index>(k)] = s;
  }
  return out;
}

double BoundModel::gwesp_change(const Term& t, const Graph& g, Vertex i, Vertex j) const {
  // Shared-partner counts of ik and jk are taken in the graph without {i,j}.
  const std::size_t present = g.has_edge(i, j) ? 1 : 0;
  double delta = 0.0;
  std::size_t shared = 0;
  g.for_each_common_neighbor(i, j, [&](Vertex k) {
    ++shared;
    delta += t.ratio[g.common_neighbors(i, k) - present];
    delta += t.ratio[g.common_neighbors(j, k) - present];
  });
  return delta + t.weight[shared];
}

void BoundModel::change_statistics(const Graph& g, Vertex i, Vertex j,
                                   std::span<double> out) const {
  double shared = -1.0;
  auto common = [&] {
    if (shared < 0) shared = static_cast<double>(g.common_neighbors(i, j));
    return shared;
  };
  auto stars = [&] {
    const double present = g.has_edge(i, j) ? 1.0 : 0.0;
    return static_cast<double>(g.degree(i) + g.degree(j)) - 2 * present;
  };
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const Term& t = terms_[k];
    switch (t.kind) {
      case TermKind::TwoStars: out[k] = stars(); break;
      case TermKind::Triangles: out[k] = common(); break;
      case TermKind::OpenTwoPaths: out[k] = stars() - 3 * common(); break;
      case TermKind::Gwesp: out[k] = gwesp_change(t, g, i, j); break;
      default: out[k] = dyad_value(t, i, j); break;
    }
  }
}

Eigen::VectorXd BoundModel::change_statistics(const Graph& g, Vertex i, Vertex j) const {
  if (i >= n_ || j >= n_ || i == j) {
    throw IndexError("invalid dyad {" + std::to_string(i) + "," + std::to_string(j) + "}");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(terms_.size()));
  change_statistics(g, i, j, std::span<double>(out.data(), terms_.size()));
  return out;
}

SupportBounds BoundModel::support_bounds(const SupportConstraint& c) const {
  const std::size_t p = terms_.size();
  Graph low(n_);
  c.impose(low);
  Graph high(n_);
  for (Vertex i = 0; i < n_; ++i)
    for (Vertex j = i + 1; j < n_; ++j) high.set_edge(i, j, true);
  c.impose(high);
  const Eigen::VectorXd g_low = statistics(low);
  const Eigen::VectorXd g_high = statistics(high);
  const auto free = c.free_dyads();

  SupportBounds b{Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p), -INFINITY),
                  Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p), INFINITY),
                  std::vector<bool>(p, false)};
  for (std::size_t k = 0; k < p; ++k) {
    const Term& t = terms_[k];
    const auto idx = static_cast<Eigen::Index>(k);
    int direction = 0;
    switch (t.kind) {
      case TermKind::Edges:
      case TermKind::Nodematch:
      case TermKind::Nodemix:
      case TermKind::TwoStars:
      case TermKind::Triangles:
      case TermKind::Gwesp: direction = 1; break;
      case TermKind::Nodecov:
      case TermKind::Edgecov: {
        bool nonneg = true;
        bool nonpos = true;
        for (const auto& d : free) {
          const double v = dyad_value(t, d.i, d.j);
          nonneg = nonneg && v >= 0;
          nonpos = nonpos && v <= 0;
        }
        direction = nonneg ? 1 : (nonpos ? -1 : 0);
        break;
      }
      case TermKind::OpenTwoPaths: break;
    }
    if (direction > 0) {
      b.lower[idx] = g_low[idx];
      b.upper[idx] = g_high[idx];
      b.known[k] = true;
    } else if (direction < 0) {
      b.lower[idx] = g_high[idx];
      b.upper[idx] = g_low[idx];
      b.known[k] = true;
    }
  }
  return b;
}

void BoundModel::check_identifiable(const SupportConstraint& c) const {
  const auto free = c.free_dyads();
  if (free.empty()) throw ModelError("support constraint fixes every dyad");
  std::vector<std::size_t> independent;
  for (std::size_t k = 0; k < terms_.size(); ++k)
    if (spec_[k].dyad_independent()) independent.push_back(k);
  if (independent.empty()) return;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(free.size()),
                    static_cast<Eigen::Index>(independent.size()));
  for (std::size_t r = 0; r < free.size(); ++r)
    for (std::size_t c2 = 0; c2 < independent.size(); ++c2)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c2)) =
          dyad_value(terms_[independent[c2]], free[r].i, free[r].j);
  for (std::size_t c2 = 0; c2 < independent.size(); ++c2) {
    if (x.col(static_cast<Eigen::Index>(c2)).isZero(0.0)) {
      throw ModelError("term '" + spec_[independent[c2]].label() +
                       "' is constant on the support (no free dyad contributes)");
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (static_cast<std::size_t>(qr.rank()) < independent.size()) {
    std::string names;
    for (std::size_t k : independent) names += (names.empty() ? "" : ", ") + spec_[k].label();
    throw ModelError("dyad-independent terms are linearly dependent on the support: " + names);
  }
}

StatVector statistics(const ModelSpec& model, const Graph& g, const CovariateSet& cov) {
  return {BoundModel(model, cov).statistics(g), StatLabel::Observed};
}

StatVector change_statistics(const ModelSpec& model, const Graph& g, const CovariateSet& cov,
                             Dyad dyad) {
  return {BoundModel(model, cov).change_statistics(g, dyad.i, dyad.j), StatLabel::Observed};
}

StatVector statistics_mean(const BoundModel& model, std::span<const Graph> graphs) {
  if (graphs.empty()) throw UsageError("statistics_mean of an empty graph set");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));
  for (const auto& g : graphs) sum += model.statistics(g);
  return {sum / static_cast<double>(graphs.size()), StatLabel::Mean};
}

StatVector statistics_mean(const ModelSpec& model, const GraphSet& set) {
  return statistics_mean(BoundModel(model, set.covariates()), set.graphs());
}

}  // namespace ergmpool
