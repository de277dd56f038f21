#include "bergman/stegenga.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "bergman/random.hpp"

namespace bergman {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;
const Complex kI{0.0, 1.0};

unsigned trailing_zeros(const BigInt& v) {
  return v == 0 ? 0u : static_cast<unsigned>(boost::multiprecision::lsb(boost::multiprecision::abs(v)));
}

// Aligns both operands to the larger exponent.
std::pair<BigInt, BigInt> aligned(const DyadicRational& a, const DyadicRational& b, unsigned& e) {
  e = std::max(a.exponent(), b.exponent());
  return {a.numerator() << (e - a.exponent()), b.numerator() << (e - b.exponent())};
}

void check_generation(int n, int max, const char* what) {
  if (n < 0 || n > max)
    throw ArgumentError(std::string(what) + ": generation must lie in [0, " + std::to_string(max) + "]");
}

// Neumaier-compensated complex accumulator.
struct CompensatedSum {
  double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;
  static void add(double& s, double& c, double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  void operator+=(Complex v) {
    add(re, cre, v.real());
    add(im, cim, v.imag());
  }
  Complex value() const { return {re + cre, im + cim}; }
};

// Values of an analytic function on rings 1 - |z| = 2^{-i / per_octave},
// interpolated linearly in (log2(1 - |z|), angle).
struct RingTable {
  int per_octave = 12;
  int octaves = 0;
  std::vector<std::vector<Complex>> rings;

  Complex ring_value(std::size_t k, double turns) const {
    const auto& v = rings[k];
    const double x = turns * static_cast<double>(v.size());
    const double fl = std::floor(x);
    const double fr = x - fl;
    const std::size_t j = static_cast<std::size_t>(fl) % v.size();
    return (1.0 - fr) * v[j] + fr * v[(j + 1) % v.size()];
  }

  Complex operator()(Complex z) const {
    const double s = 1.0 - std::abs(z);
    const double top = static_cast<double>(per_octave * octaves);
    const double u = std::clamp(-per_octave * std::log2(std::max(s, 1e-300)), 0.0, top);
    const std::size_t i0 = static_cast<std::size_t>(std::floor(u));
    const std::size_t i1 = std::min(i0 + 1, rings.size() - 1);
    const double fr = u - static_cast<double>(i0);
    const double t = turns_of(z);
    return (1.0 - fr) * ring_value(i0, t) + fr * ring_value(i1, t);
  }
};

}  // namespace

DyadicRational::DyadicRational(BigInt num, unsigned exp) : num_(std::move(num)), exp_(exp) {
  const unsigned tz = std::min(trailing_zeros(num_), exp_);
  if (num_ == 0) {
    exp_ = 0;
  } else if (tz > 0) {
    num_ >>= tz;
    exp_ -= tz;
  }
}

DyadicRational DyadicRational::pow2(int k) {
  if (k >= 0) return DyadicRational(BigInt(1) << k, 0);
  return DyadicRational(BigInt(1), static_cast<unsigned>(-k));
}

Rational DyadicRational::rational() const { return Rational(num_, BigInt(1) << exp_); }

double DyadicRational::to_double() const {
  // Keep 64 significant bits before rounding to double.
  const long bits = static_cast<long>(num_ == 0 ? 0 : boost::multiprecision::msb(boost::multiprecision::abs(num_)));
  const long drop = std::max(0L, bits - 63);
  const BigInt top = num_ >> drop;
  return std::ldexp(top.convert_to<double>(), static_cast<int>(drop) - static_cast<int>(exp_));
}

std::string DyadicRational::str() const {
  return exp_ == 0 ? num_.str() : num_.str() + "/2^" + std::to_string(exp_);
}

DyadicRational operator+(const DyadicRational& a, const DyadicRational& b) {
  unsigned e;
  auto [x, y] = aligned(a, b, e);
  return DyadicRational(x + y, e);
}

DyadicRational operator-(const DyadicRational& a, const DyadicRational& b) {
  unsigned e;
  auto [x, y] = aligned(a, b, e);
  return DyadicRational(x - y, e);
}

DyadicRational operator*(const DyadicRational& a, const DyadicRational& b) {
  return DyadicRational(a.num_ * b.num_, a.exp_ + b.exp_);
}

std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b) {
  unsigned e;
  auto [x, y] = aligned(a, b, e);
  return x < y ? std::strong_ordering::less : (x > y ? std::strong_ordering::greater : std::strong_ordering::equal);
}

std::vector<DyadicRational> lambda_seq(int n) {
  check_generation(n, 20, "lambda_seq");
  std::vector<DyadicRational> out{DyadicRational::integer(1)};
  for (int j = 1; j <= n; ++j) out.push_back(DyadicRational::pow2(-(1 << j)));
  return out;
}

long log2_scale_product(int n) {
  check_generation(n, 20, "scale_product");
  return -((2L << n) - 2);
}

DyadicRational scale_product(int n) { return DyadicRational::pow2(static_cast<int>(log2_scale_product(n))); }

std::vector<DyadicRational> generation_points(int n) {
  check_generation(n, 12, "generation_points");
  const auto lambda = lambda_seq(n);
  std::vector<DyadicRational> pts{DyadicRational::integer(0)};
  DyadicRational p = DyadicRational::integer(1);  // lambda_0 ... lambda_{j-1}
  const DyadicRational one = DyadicRational::integer(1);
  for (int j = 1; j <= n; ++j) {
    const DyadicRational step = (one - lambda[j]) * p;
    const std::size_t m = pts.size();
    for (std::size_t i = 0; i < m; ++i) pts.push_back(pts[i] + step);
    p = p * lambda[j];
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

CantorSet cantor_set(int n) {
  CantorSet c;
  c.n = n;
  c.lambda = lambda_seq(n);
  for (int j = 0; j <= n; ++j) c.p.push_back(scale_product(j));
  c.points = generation_points(n);
  return c;
}

Rational tau_value(int n) {
  check_generation(n, 20, "tau_value");
  const auto lambda = lambda_seq(n);
  const DyadicRational one = DyadicRational::integer(1);
  // term_m = (1 - lambda_m) lambda_0 ... lambda_{m-1}
  std::vector<DyadicRational> term(static_cast<std::size_t>(n) + 1);
  DyadicRational p = one;
  for (int m = 1; m <= n; ++m) {
    term[m] = (one - lambda[m]) * p;
    p = p * lambda[m];
  }
  Rational best = 0;
  for (int j = 1; j < n; ++j) {
    DyadicRational tail;
    for (int m = j + 1; m <= n; ++m) tail = tail + term[m];
    best = std::max(best, Rational(tail.rational() / term[j].rational()));
  }
  return best;
}

Rational tau_bound() { return Rational(5, 12); }

KstepResult kstep_check(int n) {
  check_generation(n, 10, "kstep_check");
  const auto pts = generation_points(n);
  KstepResult out;
  const Rational tau = tau_value(n);
  out.bound = (Rational(1, 2) - tau) / (1 + tau);
  if (pts.size() < 2) {
    out.min_ratio = Rational(1, 2);
    out.holds = true;
    return out;
  }
  DyadicRational best_d, best_w;  // the minimum is best_d / best_w
  bool have = false;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const DyadicRational mid = (pts[a] + pts[b]).half();
      const auto it = std::lower_bound(pts.begin(), pts.end(), mid);
      DyadicRational d = (*it - mid).abs();
      if (it != pts.begin()) d = std::min(d, (mid - *std::prev(it)).abs());
      const DyadicRational w = pts[b] - pts[a];
      if (!have || d * best_w < best_d * w) {
        best_d = d;
        best_w = w;
        have = true;
      }
    }
  out.min_ratio = best_d.rational() / best_w.rational();
  out.holds = out.min_ratio >= out.bound;
  return out;
}

ConditionK condition_K_check(int n, std::size_t trials, std::uint64_t seed) {
  check_generation(n, 12, "condition_K_check");
  std::vector<double> pts;
  for (const auto& p : generation_points(n)) pts.push_back(p.to_double());
  auto dist = [&](double x) {
    const auto it = std::lower_bound(pts.begin(), pts.end(), x);
    double d = it == pts.end() ? INFINITY : *it - x;
    if (it != pts.begin()) d = std::min(d, x - *std::prev(it));
    return d;
  };
  Rng rng(seed);
  ConditionK out;
  out.trials = trials;
  out.min_ratio = INFINITY;
  for (std::size_t t = 0; t < trials; ++t) {
    const double len = rng.log_uniform(0x1p-24, 1.5);
    const double a = rng.uniform(-0.25, 1.25 - len);
    const double b = a + len;
    double sup = std::max(dist(a), dist(b));
    auto it = std::upper_bound(pts.begin(), pts.end(), a);
    if (it != pts.begin()) --it;
    for (; it != pts.end() && *it < b; ++it) {
      if (std::next(it) == pts.end()) break;
      const double m = 0.5 * (*it + *std::next(it));
      if (m > a && m < b) sup = std::max(sup, dist(m));
    }
    out.min_ratio = std::min(out.min_ratio, sup / len);
  }
  out.holds = out.min_ratio >= 0.25;
  return out;
}

Complex phi(Complex z) {
  if (z == Complex{1.0, 0.0}) throw ArgumentError("phi: pole at z = 1");
  return kI * (1.0 + z) / (1.0 - z);
}

Complex phi_inv(Complex zeta) {
  if (zeta == -kI) throw ArgumentError("phi_inv: pole at -i");
  return (zeta - kI) / (zeta + kI);
}

StegengaFamily build_poles(int n) {
  check_generation(n, 6, "build_poles");
  StegengaFamily fam;
  fam.n = n;
  fam.log2_p = log2_scale_product(n);
  fam.log2_prefactor = -0.5 * n + static_cast<double>(fam.log2_p);
  const auto pts = generation_points(n);
  const double p = std::exp2(static_cast<double>(fam.log2_p));
  for (const auto& x : pts) {
    const double xd = x.to_double();
    fam.x.push_back(xd);
    const Complex pole{xd, -p};
    fam.poles.push_back(pole);
    fam.preimages.push_back(phi_inv(pole));
    // |a|^2 - 1 = 4p / (x^2 + (1 - p)^2), free of cancellation.
    const double excess = 4.0 * p / (xd * xd + (1.0 - p) * (1.0 - p));
    fam.offsets.push_back(excess / (std::sqrt(1.0 + excess) + 1.0));
  }
  const DyadicRational two_p = scale_product(n) * DyadicRational::integer(2);
  fam.admissible = true;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    if (!(two_p < pts[k + 1] - pts[k])) fam.admissible = false;
  return fam;
}

Complex eval_fn(const StegengaFamily& fam, Complex z) {
  if (!(std::abs(z) < 1.0)) throw ArgumentError("eval_fn: point must lie in the open disc");
  // phi'(z) / (phi(z) - w)^2 = 2i / (i(1 + z) - w(1 - z))^2.
  const Complex a = kI * (1.0 + z);
  const Complex b = 1.0 - z;
  CompensatedSum sum;
  for (Complex w : fam.poles) {
    const Complex d = a - w * b;
    if (d == Complex{0.0, 0.0}) throw ArgumentError("eval_fn: evaluation at a pole");
    sum += 1.0 / (d * d);
  }
  return std::exp2(fam.log2_prefactor) * 2.0 * kI * sum.value();
}

AnalyticSymbol stegenga_symbol(const StegengaFamily& fam) {
  std::vector<Feature> feats;
  for (std::size_t k = 0; k < fam.preimages.size(); ++k)
    feats.push_back({fam.preimages[k], std::max(fam.offsets[k], 1e-15)});
  auto shared = std::make_shared<StegengaFamily>(fam);
  return AnalyticSymbol::from_function([shared](Complex z) { return eval_fn(*shared, z); },
                                       "f_" + std::to_string(fam.n), std::move(feats));
}

double pole_sum_sup(const StegengaFamily& fam, const LatticeOptions& lattice) {
  const double pref = std::exp2(fam.log2_prefactor);
  double sup = 0.0;
  // The lattice plus radial probes at multiples of each pole's offset.
  std::vector<Complex> pts = boundary_lattice(lattice);
  for (std::size_t k = 0; k < fam.preimages.size(); ++k) {
    const Complex dir = fam.preimages[k] / std::abs(fam.preimages[k]);
    for (double s = fam.offsets[k]; s < 0.5; s *= 2.0) pts.push_back((1.0 - s) * dir);
  }
  for (Complex z : pts) {
    const Complex pz = phi(z);
    double acc = 0.0;
    for (Complex w : fam.poles) acc += 1.0 / std::abs(pz - w);
    sup = std::max(sup, pref * acc);
  }
  return sup;
}

AnalyticSymbol outer_function(const std::function<double(double)>& modulus, const OuterOptions& opt,
                              std::string name) {
  if (opt.resolution < 8 || opt.resolution > 22) throw ArgumentError("outer_function: resolution must lie in [8, 22]");
  if (opt.rings_per_octave < 1) throw ArgumentError("outer_function: rings_per_octave must be positive");
  const std::size_t n = std::size_t{1} << opt.resolution;

  // Midpoint nodes theta_j = 2 pi (j + 1/2) / N.
  std::vector<double> logh(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = modulus(kTau * (j + 0.5) / static_cast<double>(n));
    if (!(h > 0.0) || !std::isfinite(h))
      throw ArgumentError("outer_function: modulus must be positive and finite at every node");
    logh[j] = std::log(h);
  }
  Eigen::FFT<double> fft;
  std::vector<Complex> spec;
  fft.fwd(spec, logh);
  // c_k = (1/N) sum_j log h_j e^{-i k theta_j}; the midpoint shift is a phase.
  std::vector<Complex> c(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k)
    c[k] = spec[k] * std::polar(1.0 / static_cast<double>(n), -std::numbers::pi * k / static_cast<double>(n));

  auto table = std::make_shared<RingTable>();
  table->per_octave = opt.rings_per_octave;
  table->octaves = static_cast<int>(std::floor(std::log2(static_cast<double>(n) / 55.0)));
  const int count = table->per_octave * table->octaves + 1;
  for (int i = 0; i < count; ++i) {
    const double s = std::exp2(-static_cast<double>(i) / table->per_octave);
    const double r = 1.0 - s;
    const std::size_t m = std::min(n, std::max<std::size_t>(256, std::bit_ceil(static_cast<std::size_t>(std::ceil(256.0 / s)))));
    // Fold the series onto m equally spaced angles: bins k mod m.
    std::vector<Complex> bins(m, 0.0);
    bins[0] = c[0];
    double rk = 1.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
      rk *= r;
      if (rk < 1e-18) break;
      bins[k % m] += 2.0 * rk * c[k];
    }
    std::vector<Complex> vals;
    fft.inv(vals, bins);
    for (auto& v : vals) v = std::exp(v * static_cast<double>(m));
    table->rings.push_back(std::move(vals));
  }
  return AnalyticSymbol::from_function([table](Complex z) { return (*table)(z); }, std::move(name));
}

std::vector<Complex> cantor_on_circle(int generation) {
  std::vector<Complex> out;
  for (const auto& x : generation_points(generation)) out.push_back(phi_inv(Complex{x.to_double(), 0.0}));
  return out;
}

AnalyticSymbol dynkin_symbol(int generation, const OuterOptions& opt) {
  auto set = cantor_on_circle(generation);
  set.push_back(Complex{1.0, 0.0});
  const AnalyticSymbol w = outer_function(
      [set](double theta) {
        const Complex e = std::polar(1.0, theta);
        double d = INFINITY;
        for (Complex a : set) d = std::min(d, std::abs(e - a));
        return std::sqrt(d);
      },
      opt, "w_half");
  return AnalyticSymbol::from_function(
      [w](Complex z) {
        const Complex v = w(z);
        return (1.0 - z) * v * v;
      },
      "g");
}

LowerBoundCheck lowbg_check(const AnalyticSymbol& g, const LatticeOptions& lattice) {
  const auto pts = boundary_lattice(lattice);
  std::vector<Complex> val(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) val[i] = g(pts[i]);
  LowerBoundCheck out;
  out.min_ratio = INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i)
    out.min_ratio = std::min(out.min_ratio, std::abs(val[i]) / (1.0 - std::abs(pts[i])));
  auto lip = [&](std::size_t i, std::size_t j) {
    out.lipschitz = std::max(out.lipschitz, std::abs(val[i] - val[j]) / std::abs(pts[i] - pts[j]));
  };
  // Ring k occupies a contiguous block of angular0 * 2^k points.
  std::size_t start = 1;
  std::size_t prev_start = 0, prev_size = 1;
  for (int k = 1; k <= lattice.rings; ++k) {
    const std::size_t size = static_cast<std::size_t>(lattice.angular0) << k;
    for (std::size_t j = 0; j < size; ++j) {
      lip(start + j, start + (j + 1) % size);
      lip(start + j, prev_start + (prev_size == 1 ? 0 : (j / 2) % prev_size));
    }
    prev_start = start;
    prev_size = size;
    start += size;
  }
  return out;
}

PipelineResult counterexample_pipeline(const PipelineOptions& opt) {
  if (opt.n_max < 1 || opt.n_max > 6) throw ArgumentError("counterexample_pipeline: n_max must lie in [1, 6]");
  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult res;
  const AnalyticSymbol g = dynkin_symbol(opt.g_generation, opt.outer);
  res.g_check = lowbg_check(g, opt.lattice);
  const SymbolSample sg = sample_symbol(g, opt.sample);
  for (int n = 1; n <= opt.n_max; ++n) {
    const StegengaFamily fam = build_poles(n);
    const AnalyticSymbol f = stegenga_symbol(fam);
    const SymbolSample sf = sample_symbol(f, opt.sample);
    PipelineRow row;
    row.n = n;
    row.gamma = gamma(sf, opt.depth);
    const ConditionFour c4 = test_conditions_4(sf, sg, opt.depth);
    row.c0a = c4.c0a;
    row.c0b = c4.c0b;
    row.b_fg = b_fg(f, g, opt.lattice, opt.tol).value;
    row.norm2 = sf.norm2;
    row.sup_fg = sampled_sup_product(f, g, opt.lattice);
    row.ourex_ratio = row.b_fg / (row.norm2 + row.sup_fg * row.sup_fg + row.gamma * row.gamma);

    // The log family reaches down to the pole scale above the Cantor points.
    DeltaOptions d = opt.delta;
    const double p = std::exp2(static_cast<double>(fam.log2_p));
    if (std::find(d.offsets.begin(), d.offsets.end(), p) == d.offsets.end()) d.offsets.push_back(p);
    const DeltaResult dl = delta_lower(f, d);
    row.delta_lower = dl.value;
    row.delta_certified = dl.certified;
    res.rows.push_back(row);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

CsvTable pipeline_csv(const PipelineResult& r) {
  CsvTable t;
  t.header = {"n", "gamma", "delta_lower", "b_fg", "C0a", "C0b", "ourex_ratio"};
  for (const auto& row : r.rows)
    t.add_row({std::to_string(row.n), format_double(row.gamma), format_double(row.delta_lower),
               format_double(row.b_fg), format_double(row.c0a), format_double(row.c0b),
               format_double(row.ourex_ratio)});
  return t;
}

Json pipeline_json(const PipelineResult& r, const PipelineOptions& opt) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"n", row.n},
                        {"gamma", row.gamma},
                        {"delta_lower", row.delta_lower},
                        {"delta_certified", row.delta_certified},
                        {"b_fg", row.b_fg},
                        {"C0a", row.c0a},
                        {"C0b", row.c0b},
                        {"norm2", row.norm2},
                        {"sampled_sup_fg", row.sup_fg},
                        {"ourex_ratio", row.ourex_ratio}});
  return Json{{"rows", rows},
              {"g", Json{{"generation", opt.g_generation},
                         {"resolution", opt.outer.resolution},
                         {"min_abs_g_over_distance", r.g_check.min_ratio},
                         {"sampled_lipschitz", r.g_check.lipschitz}}},
              {"depth", opt.depth},
              {"mesh_depth", opt.sample.mesh_depth},
              {"quad_order", opt.sample.order},
              {"rule_floor", opt.sample.floor},
              {"lattice", Json{{"rings", opt.lattice.rings}, {"angular0", opt.lattice.angular0}}},
              {"delta_degree", opt.delta.degree},
              {"tol", opt.tol},
              {"seconds", r.seconds}};
}

}  // namespace bergman
