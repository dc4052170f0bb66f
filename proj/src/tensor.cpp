#include "evt/tensor.hpp"

#include <cmath>
#include <limits>

namespace evt {

void matvec(const double* m, size_t rows, size_t cols, const double* x, double* y) {
  for (size_t i = 0; i < rows; ++i) {
    const double* r = m + i * cols;
    double s = 0.0;
    for (size_t j = 0; j < cols; ++j) s += r[j] * x[j];
    y[i] = s;
  }
}

void matvec_add(const double* m, size_t rows, size_t cols, const double* x, double* y) {
  for (size_t i = 0; i < rows; ++i) {
    const double* r = m + i * cols;
    double s = 0.0;
    for (size_t j = 0; j < cols; ++j) s += r[j] * x[j];
    y[i] += s;
  }
}

void matvec_transposed_add(const double* m, size_t rows, size_t cols, const double* x,
                           double* y) {
  for (size_t i = 0; i < rows; ++i) {
    const double* r = m + i * cols;
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (size_t j = 0; j < cols; ++j) y[j] += r[j] * xi;
  }
}

void outer_add(double* m, size_t rows, size_t cols, const double* u, const double* v,
               double alpha) {
  for (size_t i = 0; i < rows; ++i) {
    double* r = m + i * cols;
    const double ui = alpha * u[i];
    if (ui == 0.0) continue;
    for (size_t j = 0; j < cols; ++j) r[j] += ui * v[j];
  }
}

size_t Rng::weighted(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  assert(total > 0.0);
  double r = uniform() * total;
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  return weights.size() - 1;
}

double dot(const double* x, const double* y, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double log_sum_exp(const double* x, size_t n) {
  if (n == 0) return -std::numeric_limits<double>::infinity();
  double m = x[0];
  for (size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

}  // namespace evt
