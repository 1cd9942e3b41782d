#include "coprime/distributions.hpp"

#include <array>
#include <limits>
#include <cmath>
#include <mutex>
#include <numbers>
#include <queue>
#include <sstream>

#include "coprime/errors.hpp"

namespace coprime {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void check_support(double a, double b) {
  if (!(a > -kHalfPi - 1e-15 && a < b && b <= kHalfPi + 1e-15)) {
    std::ostringstream os;
    os << "prior support (" << a << ", " << b << ") must satisfy -pi/2 < a < b <= pi/2";
    throw InvalidArgument(os.str());
  }
}

double normal_mass(double a, double b, double mu, double sigma) {
  const double s = sigma * std::numbers::sqrt2;
  return 0.5 * (std::erf((b - mu) / s) - std::erf((a - mu) / s));
}

}  // namespace

DoAPrior::DoAPrior(Kind k) : kind_(k) {}

DoAPrior DoAPrior::uniform(double a, double b) {
  check_support(a, b);
  return DoAPrior(UniformPrior{a, b});
}

DoAPrior DoAPrior::truncated_normal(double a, double b, double mu, double sigma2) {
  check_support(a, b);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidArgument("truncated normal variance must be positive");
  }
  DoAPrior p(TruncatedNormalPrior{a, b, mu, sigma2});
  p.norm_ = normal_mass(a, b, mu, std::sqrt(sigma2));
  if (!(p.norm_ > 0.0)) throw InvalidArgument("truncated normal has no mass on its support");
  return p;
}

double DoAPrior::lower() const noexcept {
  return std::visit([](const auto& d) { return d.a; }, kind_);
}

double DoAPrior::upper() const noexcept {
  return std::visit([](const auto& d) { return d.b; }, kind_);
}

double DoAPrior::pdf(double theta) const {
  if (!(theta > lower() && theta < upper())) return 0.0;
  if (const auto* u = std::get_if<UniformPrior>(&kind_)) return 1.0 / (u->b - u->a);
  const auto& t = std::get<TruncatedNormalPrior>(kind_);
  const double sigma = std::sqrt(t.sigma2);
  const double z = (theta - t.mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi)) / norm_;
}

std::vector<double> DoAPrior::sample(int K, Rng& rng) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(K, 0)));
  const double a = lower();
  const double b = upper();
  if (is_uniform()) {
    std::uniform_real_distribution<double> u(a, b);
    while (static_cast<int>(out.size()) < K) {
      const double x = u(rng);
      if (x > a && x < b) out.push_back(x);
    }
    return out;
  }
  const auto& t = std::get<TruncatedNormalPrior>(kind_);
  std::normal_distribution<double> n(t.mu, std::sqrt(t.sigma2));
  while (static_cast<int>(out.size()) < K) {
    const double x = n(rng);
    if (x > a && x < b) out.push_back(x);
  }
  return out;
}

std::string DoAPrior::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* u = std::get_if<UniformPrior>(&kind_)) {
    os << "uniform(" << u->a << "," << u->b << ")";
  } else {
    const auto& t = std::get<TruncatedNormalPrior>(kind_);
    os << "truncated_normal(" << t.a << "," << t.b << "," << t.mu << "," << t.sigma2 << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7/15

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights at kXgk[1], kXgk[3], kXgk[5], kXgk[7].
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a;
  double b;
  cplx value;
  double error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

Interval gk15(const ComplexIntegrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const cplx fc = f(center);
  cplx kronrod = fc * kWgk[7];
  cplx gauss = fc * kWg[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = half * kXgk[static_cast<std::size_t>(k)];
    const cplx pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[static_cast<std::size_t>(k)] * pair;
    if (k % 2 == 1) gauss += kWg[static_cast<std::size_t>(k / 2)] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_gauss_kronrod(const ComplexIntegrand& f, double a, double b,
                                         double abs_tol, int max_subdivisions) {
  std::priority_queue<Interval> heap;
  Interval whole = gk15(f, a, b);
  cplx total = whole.value;
  double error = whole.error;
  heap.push(whole);
  int count = 1;
  while (error > abs_tol) {
    if (count >= max_subdivisions) {
      std::ostringstream os;
      os << "quadrature error " << error << " above tolerance " << abs_tol << " after "
         << count << " subdivisions";
      throw QuadratureNonConvergence(os.str());
    }
    const Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Interval left = gk15(f, worst.a, mid);
    const Interval right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
    if (count % 64 == 0) {
      // Re-sum to shed accumulated rounding in the running totals.
      auto copy = heap;
      total = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, error, count};
}

cplx characteristic_integral(const DoAPrior& prior, double x, double abs_tol) {
  if (x == 0.0) return 1.0;
  const auto integrand = [&prior, x](double theta) {
    return prior.pdf(theta) * std::polar(1.0, -std::numbers::pi * x * std::sin(theta));
  };
  return integrate_gauss_kronrod(integrand, prior.lower(), prior.upper(), abs_tol).value;
}

// ---------------------------------------------------------------------------

CharacteristicIntegralTable::CharacteristicIntegralTable(DoAPrior prior, double abs_tol)
    : prior_(std::move(prior)), tol_(abs_tol) {}

namespace {
std::int64_t quantize(double x) { return std::llround(x * 1e12); }
}  // namespace

cplx CharacteristicIntegralTable::operator()(double x) const {
  const auto key = quantize(x);
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const cplx value = characteristic_integral(prior_, x, tol_);
  std::unique_lock lock(mutex_);
  cache_.emplace(key, value);
  return value;
}

void CharacteristicIntegralTable::precompute(int lo, int hi) {
  for (int x = lo; x <= hi; ++x) (void)(*this)(static_cast<double>(x));
}

std::size_t CharacteristicIntegralTable::cached() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

// ---------------------------------------------------------------------------
// Bessel J0

namespace {

double j0_series(double z) {
  const double q = 0.25 * z * z;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
  }
  return sum;
}

// J0(z) = (1/pi) int_0^pi cos(z sin t) dt. The integrand is pi-periodic and
// analytic, so the equispaced rule converges geometrically once the node
// count exceeds z/2.
double j0_trapezoid(double z) {
  const int n = static_cast<int>(std::ceil(0.5 * z)) + 40;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += std::cos(z * std::sin(std::numbers::pi * k / n));
  }
  return sum / n;
}

// Hankel expansion, truncated at the smallest term.
double j0_asymptotic(double z) {
  const double inv8z = 1.0 / (8.0 * z);
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;  // a_k(0) / (8z)^k without sign
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd / (static_cast<double>(k)) * inv8z;
    if (std::abs(term) >= last) break;
    last = std::abs(term);
    // k odd contributes to Q, k even to P; signs alternate in pairs.
    if (k % 2 == 1) {
      q += ((k / 2) % 2 == 0 ? -1.0 : 1.0) * term;
    } else {
      p += ((k / 2) % 2 == 1 ? -1.0 : 1.0) * term;
    }
  }
  const double chi = z - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * z)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j0(double z) {
  const double x = std::abs(z);
  if (x < 8.0) return j0_series(x);
  if (x < 30.0) return j0_trapezoid(x);
  return j0_asymptotic(x);
}

}  // namespace coprime
