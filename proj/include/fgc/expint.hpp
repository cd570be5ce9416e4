#pragma once

namespace fgc {

// Exponential integral E1(x) for x > 0, relative error < 1e-10.
double expint_e1(double x);

// exp(x) * E1(x), stable for large x where E1 underflows.
double expint_e1_scaled(double x);

}  // namespace fgc
