#include "wavekin/measures.hpp"

#include <algorithm>
#include <array>
#include <cfenv>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wavekin/simd/kernels.hpp"

namespace wavekin {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, std::optional<double> h)
    : atoms_(std::move(atoms)), h_(h) {
  if (h_ && !(*h_ > 0.0)) throw std::invalid_argument("grid resolution h must be > 0");
  for (const auto& a : atoms_) {
    if (!(a.omega >= 0.0) || !std::isfinite(a.omega)) {
      throw std::invalid_argument("atom positions must be finite and >= 0");
    }
  }
  if (h_) {
    // snap to c * h so equal cells share bits
    for (auto& a : atoms_) {
      const double c = std::nearbyint(a.omega / *h_);
      if (std::abs(a.omega - c * *h_) > 1e-9 * std::max(*h_, a.omega)) {
        throw std::invalid_argument("atom at " + format_double(a.omega) + " is not a multiple of h = " +
                                    format_double(*h_));
      }
      a.omega = c * *h_;
    }
  }
}

DiscreteMeasure DiscreteMeasure::delta(double omega, double weight) {
  return DiscreteMeasure({{omega, weight}});
}

DiscreteMeasure DiscreteMeasure::from_cells(std::span<const std::uint64_t> cells,
                                            std::span<const double> weights, double h) {
  if (cells.size() != weights.size()) {
    throw std::invalid_argument("from_cells: cells and weights differ in length");
  }
  std::vector<Atom> atoms;
  atoms.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    atoms.push_back({static_cast<double>(cells[i]) * h, weights[i]});
  }
  DiscreteMeasure m(std::move(atoms), h);
  m.compact();
  return m;
}

DiscreteMeasure DiscreteMeasure::from_dense(std::span<const double> u, double h) {
  std::vector<Atom> atoms;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u[c] != 0.0) atoms.push_back({static_cast<double>(c) * h, u[c]});
  }
  return DiscreteMeasure(std::move(atoms), h);
}

std::uint64_t DiscreteMeasure::cell(std::size_t i) const {
  if (!h_) throw std::logic_error("cell(): measure is not in grid mode");
  return static_cast<std::uint64_t>(std::llround(atoms_[i].omega / *h_));
}

std::uint64_t DiscreteMeasure::max_cell() const {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) m = std::max(m, cell(i));
  return m;
}

std::vector<double> DiscreteMeasure::to_dense(std::size_t len) const {
  std::vector<double> u(len, 0.0);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto c = cell(i);
    if (c >= len) {
      throw std::out_of_range("to_dense: atom at cell " + std::to_string(c) +
                              " lies outside the grid of " + std::to_string(len) + " cells");
    }
    u[c] += atoms_[i].weight;
  }
  return u;
}

double DiscreteMeasure::mass() const noexcept {
  CompensatedSum s;
  for (const auto& a : atoms_) s.add(a.weight);
  return s.value();
}

bool DiscreteMeasure::is_nonnegative() const noexcept {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.weight >= 0.0; });
}

DiscreteMeasure& DiscreteMeasure::compact() {
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const Atom& a, const Atom& b) { return a.omega < b.omega; });
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size();) {
    CompensatedSum s;
    std::size_t j = i;
    for (; j < atoms_.size() && atoms_[j].omega == atoms_[i].omega; ++j) s.add(atoms_[j].weight);
    const double w = s.value();
    if (w != 0.0) out.push_back({atoms_[i].omega, w});
    i = j;
  }
  atoms_ = std::move(out);
  return *this;
}

DiscreteMeasure DiscreteMeasure::scaled(double c) const {
  auto out = *this;
  for (auto& a : out.atoms_) a.weight *= c;
  return out;
}

namespace {

std::optional<double> common_resolution(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.empty()) return b.resolution();
  if (b.empty()) return a.resolution();
  if (a.resolution() == b.resolution()) return a.resolution();
  return std::nullopt;
}

}  // namespace

DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<Atom> atoms = a.atoms_;
  atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
  DiscreteMeasure m(std::move(atoms), common_resolution(a, b));
  m.compact();
  return m;
}

DiscreteMeasure operator-(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return a + b.scaled(-1.0);
}

MomentSet moments(const DiscreteMeasure& mu, const WeightFunction& w) {
  CompensatedSum W, E, P, P2;
  for (const auto& a : mu.atoms()) {
    const double p = w(a.omega);
    W.add(a.weight);
    E.add(a.omega * a.weight);
    P.add(p * a.weight);
    P2.add(p * p * a.weight);
  }
  return {W.value(), E.value(), P.value(), P2.value()};
}

double tv_norm(const DiscreteMeasure& mu) {
  auto m = mu;
  m.compact();
  CompensatedSum s;
  for (const auto& a : m.atoms()) s.add(std::abs(a.weight));
  return s.value();
}

double weak_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  // Moments of mu and nu are accumulated separately so that d(mu, mu) == 0
  // exactly.
  using Acc = std::array<double, kWeakFrequencies>;
  auto trig_moments = [](const DiscreteMeasure& m, Acc& c, Acc& s) {
    std::vector<double> omega, weight;
    omega.reserve(m.size());
    weight.reserve(m.size());
    for (const auto& a : m.atoms()) {
      omega.push_back(a.omega);
      weight.push_back(a.weight);
    }
    simd::kernels().trig(omega.data(), weight.data(), omega.size(), c.data(), s.data());
  };
  Acc cm{}, sm{}, cn{}, sn{};
  trig_moments(mu, cm, sm);
  trig_moments(nu, cn, sn);
  double d = 0.0;
  double coef = 0.5;
  for (std::size_t k = 0; k < kWeakFrequencies; ++k) {
    d += coef * 0.5 * (std::abs(cm[k] - cn[k]) + std::abs(sm[k] - sn[k]));
    coef *= 0.5;
  }
  return d;
}

DiscreteMeasure quantize(const DiscreteMeasure& mu, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("quantize: h must be > 0");
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const auto& a : mu.atoms()) {
    const double cell = std::nearbyint(a.omega / h);  // ties to even
    atoms.push_back({cell * h, a.weight});
  }
  std::fesetround(saved);
  DiscreteMeasure out(std::move(atoms), h);
  out.compact();
  return out;
}

DiscreteMeasure quantized_exponential(double mean, double h, std::size_t cells) {
  if (!(mean > 0.0) || !(h > 0.0) || cells == 0) {
    throw std::invalid_argument("quantized_exponential: need mean > 0, h > 0, cells > 0");
  }
  // cell c collects [(c - 1/2) h, (c + 1/2) h)
  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double lo = c == 0 ? 0.0 : (static_cast<double>(c) - 0.5) * h;
    const double hi = (static_cast<double>(c) + 0.5) * h;
    const double p = std::exp(-lo / mean) - std::exp(-hi / mean);
    atoms.push_back({static_cast<double>(c) * h, p});
    total += p;
  }
  for (auto& a : atoms) a.weight /= total;
  return DiscreteMeasure(std::move(atoms), h);
}

DiscreteMeasure phi_transform(const DiscreteMeasure& mu, const WeightFunction& w) {
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const auto& a : mu.atoms()) {
    const double p = w(a.omega);
    if (p != 0.0) atoms.push_back({a.omega, a.weight * p});
  }
  return DiscreteMeasure(std::move(atoms), mu.resolution());
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu) {
  auto m = mu;
  m.compact();
  if (m.resolution()) os << "# h=" << format_double(*m.resolution()) << '\n';
  os << "omega,weight\n";
  for (const auto& a : m.atoms()) os << format_double(a.omega) << ',' << format_double(a.weight) << '\n';
}

DiscreteMeasure read_measure_csv(std::istream& is) {
  std::optional<double> h;
  std::vector<Atom> atoms;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  double last = -1.0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto p = line.find("h=");
      if (p != std::string::npos) h = std::stod(line.substr(p + 2));
      continue;
    }
    if (!header) {
      if (line != "omega,weight") {
        throw std::runtime_error("measure CSV line " + std::to_string(lineno) +
                                 ": expected header 'omega,weight'");
      }
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("measure CSV line " + std::to_string(lineno) + ": expected two fields");
    }
    double omega = 0.0;
    double weight = 0.0;
    try {
      std::size_t used = 0;
      omega = std::stod(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("trailing");
      const auto rest = line.substr(comma + 1);
      weight = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::runtime_error("measure CSV line " + std::to_string(lineno) + ": malformed number");
    }
    if (omega < last) {
      throw std::runtime_error("measure CSV line " + std::to_string(lineno) +
                               ": positions must be ascending");
    }
    last = omega;
    atoms.push_back({omega, weight});
  }
  if (!header) throw std::runtime_error("measure CSV: missing header 'omega,weight'");
  DiscreteMeasure m(std::move(atoms), h);
  if (h) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double w = m.atoms()[i].omega;
      if (static_cast<double>(m.cell(i)) * *h != w) {
        throw std::runtime_error("measure CSV: position " + format_double(w) +
                                 " is not a multiple of h=" + format_double(*h));
      }
    }
  }
  return m;
}

void write_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_measure_csv(os, mu);
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_measure_csv(is);
}

}  // namespace wavekin
