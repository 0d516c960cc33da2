#pragma once

// Discretized kernel operators in factored (matrix-free) and dense form,
// with spectral-norm estimation by power iteration and weighted
// Hilbert-Schmidt norms.
//
// All kernels handled here factor per pair of axes,
//   3D:  K((s,t,v),(a,b,p)) = c * o1(s)o2(t)o3(v) T1(s,a) T2(t,b)
//                               T3[a,b](v,p) fib(a,b,p)
//   2D:  K((t,u),(x,p))     = c * o1(t)o2(u) T1(t,x) T2c(u,p) fib(x,p)
//   1D:  K(t,b)             = c * o(t) T1c(t,b) fib(b)
// which makes one application an O(n^{d+1}) contraction instead of O(n^{2d}).

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <thread>
#include <vector>

#include "grid.hpp"

namespace g6cstar {

using cd = std::complex<double>;

/// Worker threads used by the heavy loops; results do not depend on it.
inline std::atomic<int>& runtime_threads() {
  static std::atomic<int> n{1};
  return n;
}

/// Seed for randomized starts (power iteration); 0 in OpNormOptions means
/// "use this process-wide value".
inline std::atomic<std::uint64_t>& runtime_seed() {
  static std::atomic<std::uint64_t> s{0x51a3f2c9d4e8b671ull};
  return s;
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int nt = std::min<int>(runtime_threads().load(), static_cast<int>(count));
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      const std::size_t chunk = 16;
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) return;
        const std::size_t end = std::min(begin + chunk, count);
        for (std::size_t i = begin; i < end; ++i) fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

/// Deterministic 64-bit generator (splitmix64).
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }          // [0,1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

struct LinearMap {
  virtual ~LinearMap() = default;
  virtual std::size_t dim() const = 0;
  /// out(x) = sum_y K(x,y) in(y)  (no quadrature weights).
  virtual void apply_raw(const cd* in, cd* out) const = 0;
  /// out(y) = sum_x conj(K(x,y)) in(x).
  virtual void apply_adjoint_raw(const cd* in, cd* out) const = 0;
  virtual cd entry(std::size_t row, std::size_t col) const = 0;
  /// sum_{x,y} w(x) w(y) |K(x,y)|^2, or a negative value when no structured
  /// evaluation exists (callers fall back to the entry loop).
  virtual double hs_norm_sq(const Grid& g) const { (void)g; return -1.0; }
};

// ---------------------------------------------------------------------------

struct Tensor3Map final : LinearMap {
  int n1 = 0, n2 = 0, n3 = 0;
  std::vector<double> t1;   // n1 x n1, row = output index
  std::vector<double> t2;   // n2 x n2
  std::vector<double> t3;   // (n1*n2) blocks of n3 x n3, indexed by input (a,b)
  std::vector<cd> fib;      // n1*n2*n3 over the input grid
  std::vector<double> o1, o2, o3;  // output masks, empty = all ones
  cd scale{1.0, 0.0};

  std::size_t dim() const override {
    return static_cast<std::size_t>(n1) * n2 * n3;
  }

  const double* t3_block(int ia, int ib) const {
    return t3.data() + (static_cast<std::size_t>(ia) * n2 + ib) * n3 * n3;
  }

  void apply_raw(const cd* in, cd* out) const override {
    const std::size_t n23 = static_cast<std::size_t>(n2) * n3;
    std::vector<cd> z1(dim());  // (a,b,v)
    parallel_for(static_cast<std::size_t>(n1) * n2, [&](std::size_t ab) {
      const int ia = static_cast<int>(ab) / n2, ib = static_cast<int>(ab) % n2;
      const double* blk = t3_block(ia, ib);
      const cd* zin = in + ab * n3;
      const cd* f = fib.data() + ab * n3;
      cd tmp[512];
      cd* z0 = tmp;
      std::vector<cd> heap;
      if (n3 > 512) {
        heap.resize(n3);
        z0 = heap.data();
      }
      for (int ip = 0; ip < n3; ++ip) z0[ip] = f[ip] * zin[ip];
      cd* zo = z1.data() + ab * n3;
      for (int iv = 0; iv < n3; ++iv) {
        cd acc{0, 0};
        const double* row = blk + static_cast<std::size_t>(iv) * n3;
        for (int ip = 0; ip < n3; ++ip) acc += row[ip] * z0[ip];
        zo[iv] = acc;
      }
    });
    std::vector<cd> z2(dim());  // (a,t,v)
    parallel_for(static_cast<std::size_t>(n1) * n2, [&](std::size_t at) {
      const int ia = static_cast<int>(at) / n2, it = static_cast<int>(at) % n2;
      cd* zo = z2.data() + at * n3;
      for (int iv = 0; iv < n3; ++iv) zo[iv] = cd{0, 0};
      for (int ib = 0; ib < n2; ++ib) {
        const double c = t2[static_cast<std::size_t>(it) * n2 + ib];
        if (c == 0.0) continue;
        const cd* zi = z1.data() + (static_cast<std::size_t>(ia) * n2 + ib) * n3;
        for (int iv = 0; iv < n3; ++iv) zo[iv] += c * zi[iv];
      }
    });
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t is) {
      cd* zo = out + is * n23;
      for (std::size_t k = 0; k < n23; ++k) zo[k] = cd{0, 0};
      for (int ia = 0; ia < n1; ++ia) {
        const double c = t1[is * n1 + ia];
        if (c == 0.0) continue;
        const cd* zi = z2.data() + static_cast<std::size_t>(ia) * n23;
        for (std::size_t k = 0; k < n23; ++k) zo[k] += c * zi[k];
      }
      for (int it = 0; it < n2; ++it)
        for (int iv = 0; iv < n3; ++iv) {
          double m = 1.0;
          if (!o1.empty()) m *= o1[is];
          if (!o2.empty()) m *= o2[it];
          if (!o3.empty()) m *= o3[iv];
          zo[static_cast<std::size_t>(it) * n3 + iv] *= scale * m;
        }
    });
  }

  void apply_adjoint_raw(const cd* in, cd* out) const override {
    const std::size_t n23 = static_cast<std::size_t>(n2) * n3;
    std::vector<cd> z0(dim());
    for (int is = 0; is < n1; ++is)
      for (int it = 0; it < n2; ++it)
        for (int iv = 0; iv < n3; ++iv) {
          double m = 1.0;
          if (!o1.empty()) m *= o1[is];
          if (!o2.empty()) m *= o2[it];
          if (!o3.empty()) m *= o3[iv];
          const std::size_t idx =
              (static_cast<std::size_t>(is) * n2 + it) * n3 + iv;
          z0[idx] = std::conj(scale) * m * in[idx];
        }
    std::vector<cd> z1(dim());  // (a,t,v)
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t ia) {
      cd* zo = z1.data() + ia * n23;
      for (std::size_t k = 0; k < n23; ++k) zo[k] = cd{0, 0};
      for (int is = 0; is < n1; ++is) {
        const double c = t1[static_cast<std::size_t>(is) * n1 + ia];
        if (c == 0.0) continue;
        const cd* zi = z0.data() + static_cast<std::size_t>(is) * n23;
        for (std::size_t k = 0; k < n23; ++k) zo[k] += c * zi[k];
      }
    });
    std::vector<cd> z2(dim());  // (a,b,v)
    parallel_for(static_cast<std::size_t>(n1) * n2, [&](std::size_t abm) {
      const int ia = static_cast<int>(abm) / n2, ib = static_cast<int>(abm) % n2;
      cd* zo = z2.data() + abm * n3;
      for (int iv = 0; iv < n3; ++iv) zo[iv] = cd{0, 0};
      for (int it = 0; it < n2; ++it) {
        const double c = t2[static_cast<std::size_t>(it) * n2 + ib];
        if (c == 0.0) continue;
        const cd* zi = z1.data() + (static_cast<std::size_t>(ia) * n2 + it) * n3;
        for (int iv = 0; iv < n3; ++iv) zo[iv] += c * zi[iv];
      }
    });
    parallel_for(static_cast<std::size_t>(n1) * n2, [&](std::size_t ab) {
      const int ia = static_cast<int>(ab) / n2, ib = static_cast<int>(ab) % n2;
      const double* blk = t3_block(ia, ib);
      const cd* zi = z2.data() + ab * n3;
      cd* zo = out + ab * n3;
      for (int ip = 0; ip < n3; ++ip) {
        cd acc{0, 0};
        for (int iv = 0; iv < n3; ++iv)
          acc += blk[static_cast<std::size_t>(iv) * n3 + ip] * zi[iv];
        zo[ip] = std::conj(fib[ab * n3 + ip]) * acc;
      }
    });
  }

  cd entry(std::size_t row, std::size_t col) const override {
    const int iv = static_cast<int>(row % n3), it = static_cast<int>((row / n3) % n2),
              is = static_cast<int>(row / (static_cast<std::size_t>(n2) * n3));
    const int ip = static_cast<int>(col % n3), ib = static_cast<int>((col / n3) % n2),
              ia = static_cast<int>(col / (static_cast<std::size_t>(n2) * n3));
    double m = 1.0;
    if (!o1.empty()) m *= o1[is];
    if (!o2.empty()) m *= o2[it];
    if (!o3.empty()) m *= o3[iv];
    return scale * m * t1[static_cast<std::size_t>(is) * n1 + ia] *
           t2[static_cast<std::size_t>(it) * n2 + ib] *
           t3_block(ia, ib)[static_cast<std::size_t>(iv) * n3 + ip] *
           fib[(static_cast<std::size_t>(ia) * n2 + ib) * n3 + ip];
  }

  double hs_norm_sq(const Grid& g) const override {
    const Axis &a1 = g.axes[0], &a2 = g.axes[1], &a3 = g.axes[2];
    std::vector<double> c1(n1, 0.0), c2(n2, 0.0);
    for (int ia = 0; ia < n1; ++ia)
      for (int is = 0; is < n1; ++is) {
        const double m = o1.empty() ? 1.0 : o1[is];
        const double v = t1[static_cast<std::size_t>(is) * n1 + ia] * m;
        c1[ia] += a1.weight(is) * v * v;
      }
    for (int ib = 0; ib < n2; ++ib)
      for (int it = 0; it < n2; ++it) {
        const double m = o2.empty() ? 1.0 : o2[it];
        const double v = t2[static_cast<std::size_t>(it) * n2 + ib] * m;
        c2[ib] += a2.weight(it) * v * v;
      }
    double total = 0;
    for (int ia = 0; ia < n1; ++ia)
      for (int ib = 0; ib < n2; ++ib) {
        const double* blk = t3_block(ia, ib);
        const cd* f = fib.data() + (static_cast<std::size_t>(ia) * n2 + ib) * n3;
        double inner = 0;
        for (int iv = 0; iv < n3; ++iv) {
          const double mv = o3.empty() ? 1.0 : o3[iv];
          const double wv = a3.weight(iv) * mv * mv;
          for (int ip = 0; ip < n3; ++ip) {
            const double kv = blk[static_cast<std::size_t>(iv) * n3 + ip];
            if (kv == 0.0) continue;
            inner += wv * kv * kv * a3.weight(ip) * std::norm(f[ip]);
          }
        }
        total += a1.weight(ia) * a2.weight(ib) * c1[ia] * c2[ib] * inner;
      }
    return total * std::norm(scale);
  }
};

struct Tensor2Map final : LinearMap {
  int n1 = 0, n2 = 0;
  std::vector<double> t1;  // n1 x n1, real
  std::vector<cd> t2c;     // n2 x n2, complex
  std::vector<cd> fib;     // n1*n2 over the input grid
  std::vector<double> o1, o2;
  cd scale{1.0, 0.0};

  std::size_t dim() const override { return static_cast<std::size_t>(n1) * n2; }

  void apply_raw(const cd* in, cd* out) const override {
    std::vector<cd> z1(dim());  // (x,u)
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t ix) {
      const cd* zin = in + ix * n2;
      const cd* f = fib.data() + ix * n2;
      std::vector<cd> z0(n2);
      for (int ip = 0; ip < n2; ++ip) z0[ip] = f[ip] * zin[ip];
      cd* zo = z1.data() + ix * n2;
      for (int iu = 0; iu < n2; ++iu) {
        cd acc{0, 0};
        const cd* row = t2c.data() + static_cast<std::size_t>(iu) * n2;
        for (int ip = 0; ip < n2; ++ip) acc += row[ip] * z0[ip];
        zo[iu] = acc;
      }
    });
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t it) {
      cd* zo = out + it * n2;
      for (int iu = 0; iu < n2; ++iu) zo[iu] = cd{0, 0};
      for (int ix = 0; ix < n1; ++ix) {
        const double c = t1[it * n1 + ix];
        if (c == 0.0) continue;
        const cd* zi = z1.data() + static_cast<std::size_t>(ix) * n2;
        for (int iu = 0; iu < n2; ++iu) zo[iu] += c * zi[iu];
      }
      for (int iu = 0; iu < n2; ++iu) {
        double m = 1.0;
        if (!o1.empty()) m *= o1[it];
        if (!o2.empty()) m *= o2[iu];
        zo[iu] *= scale * m;
      }
    });
  }

  void apply_adjoint_raw(const cd* in, cd* out) const override {
    std::vector<cd> z0(dim());
    for (int it = 0; it < n1; ++it)
      for (int iu = 0; iu < n2; ++iu) {
        double m = 1.0;
        if (!o1.empty()) m *= o1[it];
        if (!o2.empty()) m *= o2[iu];
        z0[static_cast<std::size_t>(it) * n2 + iu] =
            std::conj(scale) * m * in[static_cast<std::size_t>(it) * n2 + iu];
      }
    std::vector<cd> z1(dim());  // (x,u)
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t ix) {
      cd* zo = z1.data() + ix * n2;
      for (int iu = 0; iu < n2; ++iu) zo[iu] = cd{0, 0};
      for (int it = 0; it < n1; ++it) {
        const double c = t1[static_cast<std::size_t>(it) * n1 + ix];
        if (c == 0.0) continue;
        const cd* zi = z0.data() + static_cast<std::size_t>(it) * n2;
        for (int iu = 0; iu < n2; ++iu) zo[iu] += c * zi[iu];
      }
    });
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t ix) {
      const cd* zi = z1.data() + ix * n2;
      cd* zo = out + ix * n2;
      for (int ip = 0; ip < n2; ++ip) {
        cd acc{0, 0};
        for (int iu = 0; iu < n2; ++iu)
          acc += std::conj(t2c[static_cast<std::size_t>(iu) * n2 + ip]) * zi[iu];
        zo[ip] = std::conj(fib[ix * n2 + ip]) * acc;
      }
    });
  }

  cd entry(std::size_t row, std::size_t col) const override {
    const int iu = static_cast<int>(row % n2), it = static_cast<int>(row / n2);
    const int ip = static_cast<int>(col % n2), ix = static_cast<int>(col / n2);
    double m = 1.0;
    if (!o1.empty()) m *= o1[it];
    if (!o2.empty()) m *= o2[iu];
    return scale * m * t1[static_cast<std::size_t>(it) * n1 + ix] *
           t2c[static_cast<std::size_t>(iu) * n2 + ip] *
           fib[static_cast<std::size_t>(ix) * n2 + ip];
  }

  double hs_norm_sq(const Grid& g) const override {
    const Axis &a1 = g.axes[0], &a2 = g.axes[1];
    std::vector<double> c1(n1, 0.0), c2(n2, 0.0);
    for (int ix = 0; ix < n1; ++ix)
      for (int it = 0; it < n1; ++it) {
        const double m = o1.empty() ? 1.0 : o1[it];
        const double v = t1[static_cast<std::size_t>(it) * n1 + ix] * m;
        c1[ix] += a1.weight(it) * v * v;
      }
    for (int ip = 0; ip < n2; ++ip)
      for (int iu = 0; iu < n2; ++iu) {
        const double m = o2.empty() ? 1.0 : o2[iu];
        c2[ip] += a2.weight(iu) * m * m *
                  std::norm(t2c[static_cast<std::size_t>(iu) * n2 + ip]);
      }
    double total = 0;
    for (int ix = 0; ix < n1; ++ix)
      for (int ip = 0; ip < n2; ++ip)
        total += a1.weight(ix) * a2.weight(ip) * c1[ix] * c2[ip] *
                 std::norm(fib[static_cast<std::size_t>(ix) * n2 + ip]);
    return total * std::norm(scale);
  }
};

struct Tensor1Map final : LinearMap {
  int n = 0;
  std::vector<cd> t1c;  // n x n
  std::vector<cd> fib;  // n
  std::vector<double> o1;
  cd scale{1.0, 0.0};

  std::size_t dim() const override { return static_cast<std::size_t>(n); }

  void apply_raw(const cd* in, cd* out) const override {
    for (int it = 0; it < n; ++it) {
      cd acc{0, 0};
      for (int ib = 0; ib < n; ++ib)
        acc += t1c[static_cast<std::size_t>(it) * n + ib] * fib[ib] * in[ib];
      out[it] = scale * (o1.empty() ? 1.0 : o1[it]) * acc;
    }
  }
  void apply_adjoint_raw(const cd* in, cd* out) const override {
    for (int ib = 0; ib < n; ++ib) {
      cd acc{0, 0};
      for (int it = 0; it < n; ++it)
        acc += std::conj(t1c[static_cast<std::size_t>(it) * n + ib]) *
               (o1.empty() ? 1.0 : o1[it]) * in[it];
      out[ib] = std::conj(scale * fib[ib]) * acc;
    }
  }
  cd entry(std::size_t row, std::size_t col) const override {
    return scale * (o1.empty() ? 1.0 : o1[row]) * t1c[row * n + col] * fib[col];
  }
  double hs_norm_sq(const Grid& g) const override {
    const Axis& a = g.axes[0];
    double total = 0;
    for (int it = 0; it < n; ++it) {
      const double m = o1.empty() ? 1.0 : o1[it];
      for (int ib = 0; ib < n; ++ib)
        total += a.weight(it) * a.weight(ib) * m * m *
                 std::norm(t1c[static_cast<std::size_t>(it) * n + ib] * fib[ib]);
    }
    return total * std::norm(scale);
  }
};

struct DenseMap final : LinearMap {
  std::size_t n = 0;
  std::vector<cd> m;  // row-major n x n

  std::size_t dim() const override { return n; }
  void apply_raw(const cd* in, cd* out) const override {
    parallel_for(n, [&](std::size_t i) {
      cd acc{0, 0};
      const cd* row = m.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * in[j];
      out[i] = acc;
    });
  }
  void apply_adjoint_raw(const cd* in, cd* out) const override {
    parallel_for(n, [&](std::size_t j) {
      cd acc{0, 0};
      for (std::size_t i = 0; i < n; ++i) acc += std::conj(m[i * n + j]) * in[i];
      out[j] = acc;
    });
  }
  cd entry(std::size_t row, std::size_t col) const override {
    return m[row * n + col];
  }
  double hs_norm_sq(const Grid& g) const override {
    const std::vector<double> w = g.weights();
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        total += w[i] * w[j] * std::norm(m[i * n + j]);
    return total;
  }
};

/// Linear combination of maps on the same grid.
struct SumMap final : LinearMap {
  std::size_t n = 0;
  std::vector<std::shared_ptr<const LinearMap>> terms;
  std::vector<cd> coeffs;

  void add(std::shared_ptr<const LinearMap> t, cd c = {1.0, 0.0}) {
    if (t->dim() != n && n != 0 && !terms.empty())
      throw std::invalid_argument("operator sum: dimension mismatch");
    n = t->dim();
    terms.push_back(std::move(t));
    coeffs.push_back(c);
  }

  std::size_t dim() const override { return n; }
  void apply_raw(const cd* in, cd* out) const override {
    std::vector<cd> tmp(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = cd{0, 0};
    for (std::size_t k = 0; k < terms.size(); ++k) {
      terms[k]->apply_raw(in, tmp.data());
      for (std::size_t i = 0; i < n; ++i) out[i] += coeffs[k] * tmp[i];
    }
  }
  void apply_adjoint_raw(const cd* in, cd* out) const override {
    std::vector<cd> tmp(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = cd{0, 0};
    for (std::size_t k = 0; k < terms.size(); ++k) {
      terms[k]->apply_adjoint_raw(in, tmp.data());
      for (std::size_t i = 0; i < n; ++i) out[i] += std::conj(coeffs[k]) * tmp[i];
    }
  }
  cd entry(std::size_t row, std::size_t col) const override {
    cd acc{0, 0};
    for (std::size_t k = 0; k < terms.size(); ++k)
      acc += coeffs[k] * terms[k]->entry(row, col);
    return acc;
  }
  double hs_norm_sq(const Grid& g) const override {
    if (terms.size() == 1) {
      const double h = terms[0]->hs_norm_sq(g);
      if (h >= 0) return h * std::norm(coeffs[0]);
    }
    // Entry loop; fine at the grid sizes where HS norms are requested.
    const std::vector<double> w = g.weights();
    std::vector<double> partial(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
      double acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += w[j] * std::norm(entry(i, j));
      partial[i] = w[i] * acc;
    });
    double total = 0;
    for (double p : partial) total += p;
    return total;
  }
};

/// Conjugate transpose of a map on the same grid.
struct AdjointMap final : LinearMap {
  std::shared_ptr<const LinearMap> inner;
  explicit AdjointMap(std::shared_ptr<const LinearMap> m) : inner(std::move(m)) {}
  std::size_t dim() const override { return inner->dim(); }
  void apply_raw(const cd* in, cd* out) const override {
    inner->apply_adjoint_raw(in, out);
  }
  void apply_adjoint_raw(const cd* in, cd* out) const override {
    inner->apply_raw(in, out);
  }
  cd entry(std::size_t row, std::size_t col) const override {
    return std::conj(inner->entry(col, row));
  }
  double hs_norm_sq(const Grid& g) const override { return inner->hs_norm_sq(g); }
};

/// Composition with a diagonal multiplication operator (characteristic
/// function or smooth cutoff) on the input or output side.
struct DiagMaskedMap final : LinearMap {
  std::shared_ptr<const LinearMap> inner;
  std::vector<double> mask;
  bool output_side = false;

  std::size_t dim() const override { return inner->dim(); }
  void apply_raw(const cd* in, cd* out) const override {
    const std::size_t n = dim();
    if (output_side) {
      inner->apply_raw(in, out);
      for (std::size_t i = 0; i < n; ++i) out[i] *= mask[i];
    } else {
      std::vector<cd> tmp(n);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = mask[i] * in[i];
      inner->apply_raw(tmp.data(), out);
    }
  }
  void apply_adjoint_raw(const cd* in, cd* out) const override {
    const std::size_t n = dim();
    if (output_side) {
      std::vector<cd> tmp(n);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = mask[i] * in[i];
      inner->apply_adjoint_raw(tmp.data(), out);
    } else {
      inner->apply_adjoint_raw(in, out);
      for (std::size_t i = 0; i < n; ++i) out[i] *= mask[i];
    }
  }
  cd entry(std::size_t row, std::size_t col) const override {
    return output_side ? mask[row] * inner->entry(row, col)
                       : inner->entry(row, col) * mask[col];
  }
};

struct ZeroMap final : LinearMap {
  std::size_t n = 0;
  explicit ZeroMap(std::size_t n_) : n(n_) {}
  std::size_t dim() const override { return n; }
  void apply_raw(const cd*, cd* out) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = cd{0, 0};
  }
  void apply_adjoint_raw(const cd*, cd* out) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = cd{0, 0};
  }
  cd entry(std::size_t, std::size_t) const override { return {0, 0}; }
  double hs_norm_sq(const Grid&) const override { return 0.0; }
};

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

struct OpNormOptions {
  double tol = 1e-7;
  int max_iter = 20000;
  int restarts = 2;
  std::uint64_t seed = 0;  // 0: use runtime_seed()
};

/// Largest singular value of the quadrature-symmetrized operator
/// W^{1/2} K W^{1/2}: power iteration on K*K with randomized restarts.
/// Throws NumericError when the iteration fails to settle within the
/// configured budget.
inline double op_norm(const LinearMap& K, const Grid& grid, OpNormOptions opt = {}) {
  const std::size_t n = K.dim();
  if (n != grid.size()) throw std::invalid_argument("op_norm: grid/operator size mismatch");
  std::vector<double> wh = grid.weights();
  for (double& w : wh) w = std::sqrt(w);

  std::vector<cd> x(n), y(n), z(n);
  double best = 0.0;
  bool any_converged = false;
  const std::uint64_t seed0 = opt.seed ? opt.seed : runtime_seed().load();
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(seed0 + 0x9e37ull * static_cast<std::uint64_t>(r + 1));
    double nx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = cd{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      nx += std::norm(x[i]);
    }
    nx = std::sqrt(nx);
    for (auto& v : x) v /= nx;

    double sigma = 0, prev = -1;
    int stable = 0;
    bool converged = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      for (std::size_t i = 0; i < n; ++i) y[i] = wh[i] * x[i];
      K.apply_raw(y.data(), z.data());
      for (std::size_t i = 0; i < n; ++i) z[i] *= wh[i];
      double ny = 0;
      for (const auto& v : z) ny += std::norm(v);
      sigma = std::sqrt(ny);
      if (sigma == 0.0) { converged = true; break; }  // in the kernel of K
      for (std::size_t i = 0; i < n; ++i) z[i] *= wh[i];
      K.apply_adjoint_raw(z.data(), y.data());
      for (std::size_t i = 0; i < n; ++i) y[i] *= wh[i];
      double nz = 0;
      for (const auto& v : y) nz += std::norm(v);
      nz = std::sqrt(nz);
      if (nz == 0.0) { converged = true; break; }
      for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / nz;
      if (prev >= 0 && std::abs(sigma - prev) <= opt.tol * sigma) {
        if (++stable >= 3 && it >= 8) { converged = true; break; }
      } else {
        stable = 0;
      }
      prev = sigma;
    }
    if (!converged && sigma > 0)
      throw NumericError("op_norm: power iteration did not converge");
    any_converged = true;
    best = std::max(best, sigma);
  }
  if (!any_converged) throw NumericError("op_norm: no restart converged");
  return best;
}

/// Weighted Hilbert-Schmidt norm (sum_{x,y} w(x) w(y) |K(x,y)|^2)^{1/2}.
inline double hs_norm(const LinearMap& K, const Grid& grid) {
  double h = K.hs_norm_sq(grid);
  if (h < 0) {
    const std::vector<double> w = grid.weights();
    const std::size_t n = K.dim();
    std::vector<double> partial(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
      double acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += w[j] * std::norm(K.entry(i, j));
      partial[i] = w[i] * acc;
    });
    h = 0;
    for (double p : partial) h += p;
  }
  return std::sqrt(h);
}

}  // namespace g6cstar
