#include "nacest/generators.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace nacest {

namespace {

constexpr std::array<double, 8> kXk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                       0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                       0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                       0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                       0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk15(const std::function<double(double)>& f, double a, double b, double& value, double& error) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWk[7];
  double gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double x = h * kXk[i];
    const double s = f(c - x) + f(c + x);
    kron += kWk[i] * s;
    if (i % 2 == 1) gauss += kWg[i / 2] * s;
  }
  value = kron * h;
  error = std::abs((kron - gauss) * h);
}

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece piece(const std::function<double(double)>& f, double a, double b) {
  Piece p{a, b, 0.0, 0.0};
  gk15(f, a, b, p.value, p.error);
  return p;
}

// phi(u) / phi'(u) for each family.
double ratio(Family family, double theta, double u) {
  switch (family) {
    case Family::Clayton:
      return -(u - std::pow(u, theta + 1.0)) / theta;
    case Family::Gumbel:
      return u * std::log(u) / theta;
    case Family::Frank: {
      // log of (1 - e^{-theta u}) / (1 - e^{-theta}) without cancellation
      const double lr = std::log1p(-std::exp(-theta * u)) - std::log1p(-std::exp(-theta));
      return lr * std::expm1(theta * u) / theta;
    }
    case Family::Joe: {
      const double v = 1.0 - u;
      const double w = std::pow(v, theta);
      const double lw = w < 1e-300 ? -1.0 : std::log1p(-w) / w;
      return v * lw * (1.0 - w) / theta;
    }
    case Family::Independence:
      return u * std::log(u);
  }
  return 0.0;
}

double min_theta(Family family) {
  switch (family) {
    case Family::Clayton:
    case Family::Frank: return 0.0;
    default: return 1.0;
  }
}

}  // namespace

// Global adaptive scheme: keep splitting the piece with the largest error
// estimate until the total error is below tol or the budget runs out.
double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  std::priority_queue<Piece> heap;
  heap.push(piece(f, a, b));
  double total_error = heap.top().error;
  for (int splits = 0; splits < 2000 && total_error > tol; ++splits) {
    const Piece worst = heap.top();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) break;
    heap.pop();
    const Piece left = piece(f, worst.a, m), right = piece(f, m, worst.b);
    total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Sum small pieces first.
  std::vector<double> values;
  while (!heap.empty()) {
    values.push_back(heap.top().value);
    heap.pop();
  }
  std::sort(values.begin(), values.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

std::string to_string(Family family) {
  switch (family) {
    case Family::Clayton: return "clayton";
    case Family::Gumbel: return "gumbel";
    case Family::Frank: return "frank";
    case Family::Joe: return "joe";
    case Family::Independence: return "independence";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  std::string key = name;
  for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "clayton") return Family::Clayton;
  if (key == "gumbel") return Family::Gumbel;
  if (key == "frank") return Family::Frank;
  if (key == "joe") return Family::Joe;
  if (key == "independence" || key == "indep") return Family::Independence;
  throw std::invalid_argument("unknown generator family '" + name + "'");
}

void GeneratorSpec::validate() const {
  if (!std::isfinite(theta)) throw std::invalid_argument("generator parameter is not finite");
  switch (family) {
    case Family::Clayton:
    case Family::Frank:
      if (!(theta > 0.0)) throw std::invalid_argument(to_string(family) + " needs theta > 0");
      break;
    case Family::Gumbel:
    case Family::Joe:
      if (!(theta >= 1.0)) throw std::invalid_argument(to_string(family) + " needs theta >= 1");
      break;
    case Family::Independence:
      break;
  }
}

GeneratorSpec GeneratorSpec::from_tau(Family family, double tau) {
  GeneratorSpec g;
  g.family = family;
  if (family == Family::Independence) {
    if (tau != 0.0) throw std::invalid_argument("independence has tau = 0");
    g.theta = 1.0;
    g.tau = 0.0;
    return g;
  }
  g.theta = tau_to_theta(family, tau);
  g.tau = tau;
  return g;
}

GeneratorSpec GeneratorSpec::from_theta(Family family, double theta) {
  GeneratorSpec g;
  g.family = family;
  g.theta = family == Family::Independence ? 1.0 : theta;
  g.validate();
  g.tau = family == Family::Independence ? 0.0 : theta_to_tau(family, theta);
  return g;
}

double psi(const GeneratorSpec& g, double t) {
  if (t < 0.0) throw std::invalid_argument("psi needs t >= 0");
  if (t == 0.0) return 1.0;
  const double th = g.theta;
  switch (g.family) {
    case Family::Clayton: return std::pow(1.0 + t, -1.0 / th);
    case Family::Gumbel: return std::exp(-std::pow(t, 1.0 / th));
    case Family::Frank: return -std::log(-std::expm1(-t) + std::exp(-th - t)) / th;
    case Family::Joe: return -std::expm1(std::log(-std::expm1(-t)) / th);
    case Family::Independence: return std::exp(-t);
  }
  return 0.0;
}

double psi_inv(const GeneratorSpec& g, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("psi_inv needs u in (0, 1]");
  const double th = g.theta;
  switch (g.family) {
    case Family::Clayton: return std::expm1(-th * std::log(u));
    case Family::Gumbel: return std::pow(-std::log(u), th);
    case Family::Frank:
      // e^{-th u} - e^{-th} written to stay accurate for u near 1
      return -std::log1p(-std::exp(-th * u) * std::expm1(-th * (1.0 - u)) / std::expm1(-th));
    case Family::Joe: return -std::log1p(-std::pow(1.0 - u, th));
    case Family::Independence: return -std::log(u);
  }
  return 0.0;
}

double kendall_integral(Family family, double theta) {
  GeneratorSpec{family, theta, 0.0}.validate();
  if (family == Family::Independence) return 0.0;
  return 1.0 + 4.0 * integrate([&](double u) { return ratio(family, theta, u); }, 0.0, 1.0);
}

double theta_to_tau(Family family, double theta) {
  GeneratorSpec{family, theta, 0.0}.validate();
  if (family == Family::Clayton) return theta / (theta + 2.0);
  if (family == Family::Independence) return 0.0;
  return kendall_integral(family, theta);
}

double tau_to_theta(Family family, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must be in (0, 1)");
  if (family == Family::Clayton) return 2.0 / (1.0 / tau - 1.0);
  if (family == Family::Independence) throw std::invalid_argument("independence has no parameter");
  double lo = min_theta(family);
  double hi = lo + 1.0;
  while (kendall_integral(family, hi) < tau) {
    lo = hi;
    hi = lo + 2.0 * (hi - min_theta(family));
    if (hi > 1e8) throw std::invalid_argument("tau too close to 1");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (kendall_integral(family, mid) < tau) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace nacest
