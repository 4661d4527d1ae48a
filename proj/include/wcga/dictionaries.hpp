#pragma once

// Finite systems D_N: the multivariate trigonometric system with dyadic
// blocks, tabulated systems read from files, sparse coefficient vectors and
// continuous norms of trigonometric polynomials.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcga/core.hpp"
#include "wcga/lp_space.hpp"

namespace wcga {

using Frequency = std::vector<int>;

/// Dyadic level of a frequency: j with [2^{j-1}] <= |k|_inf < 2^j, so k = 0
/// sits in level 0.
inline std::size_t frequency_level(const Frequency& k) {
  int n = 0;
  for (int c : k) n = std::max(n, std::abs(c));
  std::size_t j = 0;
  while ((1LL << j) <= n) ++j;
  return j;
}

/// Sparse map index -> coefficient. Exact zeros are never stored.
class CoefficientVector {
 public:
  using Map = std::map<std::size_t, Complex>;

  CoefficientVector() = default;
  CoefficientVector(std::initializer_list<std::pair<const std::size_t, Complex>> init) {
    for (const auto& [i, c] : init) set(i, c);
  }

  static CoefficientVector from_dense(const CVector& dense) {
    CoefficientVector out;
    for (Eigen::Index i = 0; i < dense.size(); ++i) out.set(static_cast<std::size_t>(i), dense[i]);
    return out;
  }

  static CoefficientVector from_support(const std::vector<std::size_t>& support, const CVector& values) {
    if (static_cast<std::size_t>(values.size()) != support.size()) {
      throw DimensionError("support and values differ in length");
    }
    CoefficientVector out;
    for (std::size_t i = 0; i < support.size(); ++i) out.add(support[i], values[static_cast<Eigen::Index>(i)]);
    return out;
  }

  void set(std::size_t index, Complex value) {
    if (value == Complex{}) {
      entries_.erase(index);
    } else {
      entries_[index] = value;
    }
  }

  void add(std::size_t index, Complex value) { set(index, get(index) + value); }

  [[nodiscard]] Complex get(std::size_t index) const {
    auto it = entries_.find(index);
    return it == entries_.end() ? Complex{} : it->second;
  }

  [[nodiscard]] std::size_t nnz() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] auto begin() const { return entries_.begin(); }
  [[nodiscard]] auto end() const { return entries_.end(); }
  [[nodiscard]] const Map& entries() const { return entries_; }

  [[nodiscard]] std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    s.reserve(entries_.size());
    for (const auto& [i, c] : entries_) s.push_back(i);
    return s;
  }

  [[nodiscard]] std::size_t max_index() const { return entries_.empty() ? 0 : entries_.rbegin()->first; }

  [[nodiscard]] CVector to_dense(std::size_t n) const {
    CVector out = CVector::Zero(static_cast<Eigen::Index>(n));
    for (const auto& [i, c] : entries_) {
      if (i >= n) throw IndexError("coefficient index outside the system");
      out[static_cast<Eigen::Index>(i)] = c;
    }
    return out;
  }

  [[nodiscard]] double l2_norm() const {
    double s = 0.0;
    for (const auto& [i, c] : entries_) s += std::norm(c);
    return std::sqrt(s);
  }

  friend CoefficientVector operator+(CoefficientVector a, const CoefficientVector& b) {
    for (const auto& [i, c] : b) a.add(i, c);
    return a;
  }
  friend CoefficientVector operator-(CoefficientVector a, const CoefficientVector& b) {
    for (const auto& [i, c] : b) a.add(i, -c);
    return a;
  }
  friend CoefficientVector operator*(Complex s, const CoefficientVector& a) {
    CoefficientVector out;
    for (const auto& [i, c] : a) out.set(i, s * c);
    return out;
  }

  bool operator==(const CoefficientVector&) const = default;

 private:
  Map entries_;
};

/// {e^{i(k,x)} : |k|_inf < 2^J} in canonical order: by dyadic level, then
/// lexicographically on the coordinates. Uniformly bounded by 1 and
/// orthonormal under normalized Lebesgue measure.
class TrigSystem {
 public:
  TrigSystem(std::size_t dim, std::size_t max_level) : dim_(dim), max_level_(max_level) {
    if (dim == 0) throw ParameterError("trigonometric system needs dim >= 1");
    if (max_level > 20) throw ParameterError("max_level too large");
    const int K = max_frequency();
    const int side = 2 * K + 1;
    std::size_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) {
      total *= static_cast<std::size_t>(side);
      if (total > (1u << 24)) throw ParameterError("trigonometric system too large");
    }
    std::vector<std::vector<Frequency>> by_level(max_level + 1);
    Frequency k(dim, -K);
    for (std::size_t n = 0; n < total; ++n) {
      by_level[frequency_level(k)].push_back(k);
      for (std::size_t a = dim; a-- > 0;) {  // lexicographic increment
        if (++k[a] <= K) break;
        k[a] = -K;
      }
    }
    block_start_.push_back(0);
    for (std::size_t j = 0; j <= max_level; ++j) {
      for (auto& f : by_level[j]) {
        index_.emplace(f, freqs_.size());
        freqs_.push_back(std::move(f));
        level_.push_back(j);
      }
      block_start_.push_back(freqs_.size());
    }
  }

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t max_level() const { return max_level_; }
  [[nodiscard]] int max_frequency() const { return (1 << max_level_) - 1; }
  [[nodiscard]] std::size_t size() const { return freqs_.size(); }
  [[nodiscard]] double bound() const { return 1.0; }

  [[nodiscard]] const Frequency& frequency(std::size_t i) const { return freqs_.at(i); }
  [[nodiscard]] std::size_t level(std::size_t i) const { return level_.at(i); }
  /// Indices [first, second) of block j.
  [[nodiscard]] std::pair<std::size_t, std::size_t> block_range(std::size_t j) const {
    if (j > max_level_) throw IndexError("block index beyond max level");
    return {block_start_[j], block_start_[j + 1]};
  }
  [[nodiscard]] std::optional<std::size_t> index_of(const Frequency& k) const {
    auto it = index_.find(k);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  /// Number of elements with |k|_inf < 2^n, i.e. blocks 0..n.
  [[nodiscard]] std::size_t prefix_size(std::size_t n) const { return block_start_[std::min(n, max_level_) + 1]; }

  [[nodiscard]] Complex value(std::size_t i, std::span<const double> x) const {
    const auto& k = freqs_.at(i);
    double phase = 0.0;
    for (std::size_t a = 0; a < dim_; ++a) phase += k[a] * x[a];
    return std::polar(1.0, phase);
  }

  /// Restriction to a point set: m x N matrix with entries g_i(xi^nu).
  [[nodiscard]] CMatrix sample(const PointSet& points) const {
    check_dim(points);
    const auto m = static_cast<Eigen::Index>(points.size());
    CMatrix out(m, static_cast<Eigen::Index>(size()));
    for (Eigen::Index nu = 0; nu < m; ++nu) {
      const auto x = points.point(static_cast<std::size_t>(nu));
      for (std::size_t i = 0; i < size(); ++i) out(nu, static_cast<Eigen::Index>(i)) = value(i, x);
    }
    return out;
  }

  /// Columns `indices` of the restriction only.
  [[nodiscard]] CMatrix sample_columns(const PointSet& points, const std::vector<std::size_t>& indices) const {
    check_dim(points);
    const auto m = static_cast<Eigen::Index>(points.size());
    CMatrix out(m, static_cast<Eigen::Index>(indices.size()));
    for (Eigen::Index nu = 0; nu < m; ++nu) {
      const auto x = points.point(static_cast<std::size_t>(nu));
      for (std::size_t c = 0; c < indices.size(); ++c) out(nu, static_cast<Eigen::Index>(c)) = value(indices[c], x);
    }
    return out;
  }

  void check_dim(const PointSet& points) const {
    if (points.dim() != dim_) throw DimensionError("point set dimension differs from system dimension");
  }

 private:
  std::size_t dim_;
  std::size_t max_level_;
  std::vector<Frequency> freqs_;
  std::vector<std::size_t> level_;
  std::vector<std::size_t> block_start_;
  std::map<Frequency, std::size_t> index_;
};

/// Dictionary given by its values on a fixed point set (rows = elements).
/// Nothing is rescaled; the declared bound B is carried instead.
class TabulatedSystem {
 public:
  TabulatedSystem(CMatrix values, PointSet points, double bound, std::optional<double> r1 = {},
                  std::optional<double> r2 = {}, std::optional<double> bessel_k = {})
      : values_(std::move(values)), points_(std::move(points)), bound_(bound), r1_(r1), r2_(r2), k_(bessel_k) {
    if (static_cast<std::size_t>(values_.cols()) != points_.size()) {
      throw DimensionError("tabulated columns do not match the point count");
    }
    if (values_.rows() == 0) throw ParameterError("tabulated system is empty");
    if (!(bound_ > 0.0)) throw ParameterError("bound B must be positive");
    if (values_.cwiseAbs().maxCoeff() > bound_ * (1.0 + 1e-12)) {
      throw ParameterError("tabulated values exceed the declared bound B");
    }
    if (r1_ && r2_ && !(*r1_ > 0.0 && *r1_ <= *r2_)) throw ParameterError("need 0 < R1 <= R2");
  }

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  [[nodiscard]] double bound() const { return bound_; }
  [[nodiscard]] std::optional<double> r1() const { return r1_; }
  [[nodiscard]] std::optional<double> r2() const { return r2_; }
  [[nodiscard]] std::optional<double> bessel_k() const { return k_; }
  [[nodiscard]] const PointSet& points() const { return points_; }
  [[nodiscard]] const CMatrix& values() const { return values_; }

  /// M x N restriction to the tabulation points.
  [[nodiscard]] CMatrix sample() const { return values_.transpose(); }

  /// Restriction to a subset of the tabulation points.
  [[nodiscard]] CMatrix sample_rows(const std::vector<std::size_t>& point_indices) const {
    CMatrix out(static_cast<Eigen::Index>(point_indices.size()), values_.rows());
    for (std::size_t r = 0; r < point_indices.size(); ++r) {
      if (point_indices[r] >= points_.size()) throw IndexError("point index outside tabulation");
      out.row(static_cast<Eigen::Index>(r)) = values_.col(static_cast<Eigen::Index>(point_indices[r])).transpose();
    }
    return out;
  }

  static TabulatedSystem from_json(const nlohmann::json& j);
  static TabulatedSystem from_csv(std::istream& in);
  static TabulatedSystem load(const std::string& path);

 private:
  CMatrix values_;
  PointSet points_;
  double bound_;
  std::optional<double> r1_, r2_, k_;
};

namespace detail {

inline PointSet default_tabulation_points(std::size_t count) {
  std::vector<double> c(count);
  for (std::size_t i = 0; i < count; ++i) c[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(count);
  return PointSet(1, std::move(c));
}

inline std::optional<double> opt_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace detail

/// JSON layout: {"B": b, "R1": .., "R2": .., "K": .., "dim": d,
///  "points": [[x..], ...] (optional; default equispaced 1-d grid),
///  "rows": [[[re, im], ...], ...]}.
inline TabulatedSystem TabulatedSystem::from_json(const nlohmann::json& j) {
  const auto& rows = j.at("rows");
  if (!rows.is_array() || rows.empty()) throw ParameterError("tabulated system: 'rows' must be a non-empty array");
  const std::size_t n = rows.size();
  const std::size_t m = rows.at(0).size();
  CMatrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != m) throw DimensionError("tabulated system: ragged rows");
    for (std::size_t c = 0; c < m; ++c) {
      const auto& e = rows[i][c];
      if (!e.is_array() || e.size() != 2) throw ParameterError("tabulated entries must be [re, im] pairs");
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = {e[0].get<double>(), e[1].get<double>()};
    }
  }
  PointSet pts = detail::default_tabulation_points(m);
  if (j.contains("points")) {
    const std::size_t dim = j.value("dim", std::size_t{1});
    std::vector<double> coords;
    for (const auto& p : j.at("points")) {
      if (p.size() != dim) throw DimensionError("tabulated system: point of wrong dimension");
      for (const auto& x : p) coords.push_back(x.get<double>());
    }
    pts = PointSet(dim, std::move(coords));
  }
  return {std::move(values), std::move(pts), j.at("B").get<double>(), detail::opt_number(j, "R1"),
          detail::opt_number(j, "R2"), detail::opt_number(j, "K")};
}

/// CSV layout: a header line "B=..,R1=..,R2=..,K=.." (only B required), then
/// one line per element holding re,im pairs for each grid point. The grid is
/// the equispaced 1-d grid with as many nodes as pairs per row.
inline TabulatedSystem TabulatedSystem::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("tabulated CSV: missing header");
  std::map<std::string, double> header;
  {
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ParameterError("tabulated CSV: header items must be key=value");
      auto key = item.substr(0, eq);
      key.erase(0, key.find_first_not_of(" #"));
      header[key] = std::stod(item.substr(eq + 1));
    }
  }
  if (!header.contains("B")) throw ParameterError("tabulated CSV: header lacks B");
  std::vector<std::vector<Complex>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> nums;
    while (std::getline(ss, cell, ',')) nums.push_back(std::stod(cell));
    if (nums.size() % 2 != 0) {
      throw ParameterError("tabulated CSV line " + std::to_string(line_no) + ": odd number of values");
    }
    std::vector<Complex> row(nums.size() / 2);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = {nums[2 * c], nums[2 * c + 1]};
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParameterError("tabulated CSV: no rows");
  const std::size_t m = rows[0].size();
  CMatrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m) throw DimensionError("tabulated CSV: ragged rows");
    for (std::size_t c = 0; c < m; ++c) values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  auto opt = [&](const char* k) -> std::optional<double> {
    auto it = header.find(k);
    if (it == header.end()) return std::nullopt;
    return it->second;
  };
  return {std::move(values), detail::default_tabulation_points(m), header.at("B"), opt("R1"), opt("R2"), opt("K")};
}

inline TabulatedSystem TabulatedSystem::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return from_json(nlohmann::json::parse(in));
  return from_csv(in);
}

// ---------------------------------------------------------------------------
// Evaluation and continuous norms

inline void check_indices(const CoefficientVector& a, std::size_t n) {
  if (!a.empty() && a.max_index() >= n) throw IndexError("coefficient index outside the system");
}

inline CVector evaluate(const TrigSystem& system, const CoefficientVector& coeffs, const PointSet& points) {
  check_indices(coeffs, system.size());
  system.check_dim(points);
  CVector out = CVector::Zero(static_cast<Eigen::Index>(points.size()));
  for (std::size_t nu = 0; nu < points.size(); ++nu) {
    const auto x = points.point(nu);
    Complex s{};
    for (const auto& [i, c] : coeffs) s += c * system.value(i, x);
    out[static_cast<Eigen::Index>(nu)] = s;
  }
  return out;
}

inline SampledFunction evaluate(const TrigSystem& system, const CoefficientVector& coeffs, const MeasurePtr& measure) {
  return {evaluate(system, coeffs, measure->support()), measure};
}

inline CVector evaluate(const TabulatedSystem& system, const CoefficientVector& coeffs) {
  check_indices(coeffs, system.size());
  CVector out = CVector::Zero(static_cast<Eigen::Index>(system.points().size()));
  for (const auto& [i, c] : coeffs) out += c * system.values().row(static_cast<Eigen::Index>(i)).transpose();
  return out;
}

/// Parseval: exact L_2(mu) norm of a trigonometric polynomial.
inline double continuous_l2_norm(const TrigSystem& system, const CoefficientVector& coeffs) {
  check_indices(coeffs, system.size());
  return coeffs.l2_norm();
}

/// Nodes per axis for quadrature of |f|^p when f has degree <= max_freq:
/// 8x oversampling with a floor of 64.
inline std::size_t quadrature_nodes_per_axis(int max_freq) {
  return std::max<std::size_t>(64, 8 * static_cast<std::size_t>(max_freq + 1));
}

/// Quadrature measure adequate for every element of the system.
inline MeasurePtr system_quadrature(const TrigSystem& system) {
  return std::make_shared<DiscreteMeasure>(
      DiscreteMeasure::quadrature(system.dim(), quadrature_nodes_per_axis(system.max_frequency())));
}

/// ||f||_{L_p(mu)} for f = sum a_k e^{i(k,x)}; Parseval at p = 2, otherwise
/// the tensor quadrature sized for the whole system, so every norm of the
/// same system is taken on the same grid.
inline double continuous_lp_norm(const TrigSystem& system, const CoefficientVector& coeffs, LpExponent p) {
  if (p.p() == 2.0) return continuous_l2_norm(system, coeffs);
  check_indices(coeffs, system.size());
  if (coeffs.empty()) return 0.0;
  const auto grid = PointSet::uniform_grid(system.dim(), quadrature_nodes_per_axis(system.max_frequency()));
  const CVector values = evaluate(system, coeffs, grid);
  const RVector w = RVector::Constant(values.size(), 1.0 / static_cast<double>(values.size()));
  return weighted_lp_norm(values, w, p.p());
}

/// Gram matrix of the trigonometric system in L_2(nu) for a discrete measure
/// nu on the torus. <g_l, g_k>_nu depends only on l - k, so the whole matrix
/// is stored as the moments h(n) = sum_nu w_nu e^{i(n, x_nu)}, |n|_inf <= 2K.
class TrigGram {
 public:
  TrigGram(const TrigSystem& system, const PointSet& points, const RVector& weights)
      : system_(&system), span_(2 * system.max_frequency()) {
    system.check_dim(points);
    if (static_cast<std::size_t>(weights.size()) != points.size()) throw DimensionError("weights/points mismatch");
    const std::size_t d = system.dim();
    const std::size_t side = 2 * static_cast<std::size_t>(span_) + 1;
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) total *= side;
    moments_.assign(total, Complex{});
    std::vector<Complex> powers(d * side);
    for (std::size_t nu = 0; nu < points.size(); ++nu) {
      const auto x = points.point(nu);
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t s = 0; s < side; ++s) {
          powers[a * side + s] = std::polar(1.0, (static_cast<double>(s) - span_) * x[a]);
        }
      }
      const double w = weights[static_cast<Eigen::Index>(nu)];
      if (d == 1) {
        for (std::size_t s = 0; s < side; ++s) moments_[s] += w * powers[s];
        continue;
      }
      std::vector<std::size_t> idx(d, 0);
      for (std::size_t flat = 0; flat < total; ++flat) {
        Complex v = w;
        for (std::size_t a = 0; a < d; ++a) v *= powers[a * side + idx[a]];
        moments_[flat] += v;
        for (std::size_t a = d; a-- > 0;) {
          if (++idx[a] < side) break;
          idx[a] = 0;
        }
      }
    }
  }

  /// <g_l, g_k>_nu = sum_nu w_nu conj(g_k) g_l.
  [[nodiscard]] Complex entry(std::size_t k, std::size_t l) const {
    const auto& fk = system_->frequency(k);
    const auto& fl = system_->frequency(l);
    const std::size_t side = 2 * static_cast<std::size_t>(span_) + 1;
    std::size_t flat = 0;
    for (std::size_t a = 0; a < fk.size(); ++a) {
      flat = flat * side + static_cast<std::size_t>(fl[a] - fk[a] + span_);
    }
    return moments_[flat];
  }

  [[nodiscard]] CMatrix block(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const {
    CMatrix g(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = entry(rows[r], cols[c]);
    }
    return g;
  }

  [[nodiscard]] CMatrix block(const std::vector<std::size_t>& support) const { return block(support, support); }

  [[nodiscard]] CVector column(std::size_t l) const {
    CVector out(static_cast<Eigen::Index>(system_->size()));
    for (std::size_t k = 0; k < system_->size(); ++k) out[static_cast<Eigen::Index>(k)] = entry(k, l);
    return out;
  }

  [[nodiscard]] const TrigSystem& system() const { return *system_; }

 private:
  const TrigSystem* system_;
  int span_;
  std::vector<Complex> moments_;
};

/// <f, g_k>_nu = sum_nu w_nu f_nu conj(g_k(x_nu)) for every k.
inline CVector trig_correlations(const TrigSystem& system, const SampledFunction& f) {
  const auto& pts = f.measure()->support();
  system.check_dim(pts);
  CVector out = CVector::Zero(static_cast<Eigen::Index>(system.size()));
  for (std::size_t nu = 0; nu < pts.size(); ++nu) {
    const Complex wf = f.weights()[static_cast<Eigen::Index>(nu)] * f.values()[static_cast<Eigen::Index>(nu)];
    if (wf == Complex{}) continue;
    const auto x = pts.point(nu);
    for (std::size_t k = 0; k < system.size(); ++k) out[static_cast<Eigen::Index>(k)] += wf * std::conj(system.value(k, x));
  }
  return out;
}

/// b_j = (sum_{k in block j} |a_k|^beta)^{1/beta}, j = 0..J.
inline std::vector<double> a_beta_block_norms(const CoefficientVector& coeffs, double beta, const TrigSystem& system) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in (0, 1]");
  check_indices(coeffs, system.size());
  std::vector<double> sums(system.max_level() + 1, 0.0);
  for (const auto& [i, c] : coeffs) sums[system.level(i)] += std::pow(std::abs(c), beta);
  for (double& s : sums) s = std::pow(s, 1.0 / beta);
  return sums;
}

}  // namespace wcga
