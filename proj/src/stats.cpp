#include "qfclt/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "qfclt/error.hpp"
#include "qfclt/parallel.hpp"

namespace qfclt {

void CompensatedSum::add(double v) noexcept {
  const double t = sum_ + v;
  comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
  sum_ = t;
}

double normal_cdf(double x, double variance) { return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance)); }

double mean(std::span<const double> x) {
  if (x.empty()) throw Error(Errc::empty_input, "mean of no samples");
  CompensatedSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) { return sample_covariance(x, x); }

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::domain_error, "covariance of unpaired samples");
  if (x.size() < 2) return 0.0;
  const double mx = mean(x), my = mean(y);
  CompensatedSum s;
  for (std::size_t i = 0; i < x.size(); ++i) s.add((x[i] - mx) * (y[i] - my));
  return s.value() / static_cast<double>(x.size() - 1);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // the alternating series converges slowly; the sf is 1 - 1e-40 here
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

namespace {

double kolmogorov_quantile(double alpha) {
  double lo = 0.2, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_sf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

KsResult finish(double stat, double ne, std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::domain_error, "alpha must lie in (0,1)");
  const double root = std::sqrt(ne);
  const double scale = root + 0.12 + 0.11 / root;
  KsResult r;
  r.statistic = stat;
  r.alpha = alpha;
  r.n = n;
  r.critical_value = kolmogorov_quantile(alpha) / scale;
  r.p_value = kolmogorov_sf(scale * stat);
  r.pass = stat <= r.critical_value;
  return r;
}

}  // namespace

KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf, double alpha) {
  if (x.empty()) throw Error(Errc::empty_input, "KS test on no samples");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return finish(d, n, s.size(), alpha);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.empty() || b.empty()) throw Error(Errc::empty_input, "KS test on no samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return finish(d, n * m / (n + m), x.size() + y.size(), alpha);
}

namespace {
std::atomic<unsigned> g_max_threads{0};
}

void set_max_threads(unsigned n) noexcept { g_max_threads = n; }

unsigned max_threads() noexcept {
  const unsigned cap = g_max_threads.load();
  if (cap > 0) return cap;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(max_threads(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace qfclt
