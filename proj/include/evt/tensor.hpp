#ifndef EVT_TENSOR_HPP
#define EVT_TENSOR_HPP

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace evt {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  Vec a;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(size_t i, size_t j) { return a[i * cols + j]; }
  double operator()(size_t i, size_t j) const { return a[i * cols + j]; }
  double* row(size_t i) { return a.data() + i * cols; }
  const double* row(size_t i) const { return a.data() + i * cols; }
};

/// y = M x  (M is rows x cols, x has cols entries, y has rows entries).
void matvec(const double* m, size_t rows, size_t cols, const double* x, double* y);

/// y += M x.
void matvec_add(const double* m, size_t rows, size_t cols, const double* x, double* y);

/// y += M^T x  (x has rows entries, y has cols entries).
void matvec_transposed_add(const double* m, size_t rows, size_t cols, const double* x,
                           double* y);

/// M += alpha * u v^T  (u has rows entries, v has cols entries).
void outer_add(double* m, size_t rows, size_t cols, const double* u, const double* v,
               double alpha = 1.0);

/// Deterministic random source. Draws are derived directly from the
/// mt19937_64 output stream so sequences do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), rejection-sampled.
  uint64_t below(uint64_t n) {
    assert(n > 0);
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  /// Samples an index from non-negative weights (sum must be positive).
  size_t weighted(const std::vector<double>& weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

double dot(const double* x, const double* y, size_t n);

/// log(sum_i exp(x_i)) with the max-shift trick; -inf for empty input.
double log_sum_exp(const double* x, size_t n);

}  // namespace evt

#endif  // EVT_TENSOR_HPP
