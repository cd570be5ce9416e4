#include "fgc/expint.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgc {

namespace {
constexpr double kEulerGamma = 0.57721566490153286060651209;

// power series: E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
double e1_series(double x) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -x / k;
        double add = -term / k;
        sum += add;
        if (std::fabs(add) < 1e-16 * std::fabs(sum) + 1e-300) break;
    }
    return -kEulerGamma - std::log(x) + sum;
}

// modified Lentz continued fraction for exp(x)*E1(x), x >= 1:
// E1(x) = exp(-x) / (x + 1/(1 + 1/(x + 2/(1 + 2/(x + ...)))))
double e1_cf_scaled(double x) {
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 300; ++i) {
        double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        double del = c * d;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}
}  // namespace

double expint_e1(double x) {
    if (!(x > 0.0)) throw std::domain_error("expint_e1: x must be > 0");
    if (x <= 1.0) return e1_series(x);
    return std::exp(-x) * e1_cf_scaled(x);
}

double expint_e1_scaled(double x) {
    if (!(x > 0.0)) throw std::domain_error("expint_e1_scaled: x must be > 0");
    if (x <= 1.0) return std::exp(x) * e1_series(x);
    return e1_cf_scaled(x);
}

}  // namespace fgc
