#include "support/oracles.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

namespace ksf::oracle {

std::vector<double> brute_force_envelope(std::span<const double> audio, std::size_t n) {
  std::vector<double> out(audio.size());
  for (std::size_t t = 0; t < audio.size(); ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n && i <= t; ++i) sum += std::abs(audio[t - i]);
    out[t] = sum / static_cast<double>(n);
  }
  return out;
}

double catmull_rom_basis(double p0, double p1, double p2, double p3, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double w0 = -t3 + 2.0 * t2 - t;
  const double w1 = 3.0 * t3 - 5.0 * t2 + 2.0;
  const double w2 = -3.0 * t3 + 4.0 * t2 + t;
  const double w3 = t3 - t2;
  return 0.5 * (w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3);
}

double fft_peak_hz(std::span<const double> x, double rate_hz) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x.begin(), x.end());
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), out, FFTW_ESTIMATE);
  fftw_execute(plan);
  int best = 1;
  double best_mag = -1.0;
  for (int k = 1; k <= n / 2; ++k) {
    const double mag = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(out);
  return best * rate_hz / n;
}

namespace {

template <typename F>
void for_each_upward_crossing(std::span<const double> x, F&& f) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i - 1] < 0.0 && x[i] >= 0.0) {
      const double frac = -x[i - 1] / (x[i] - x[i - 1]);
      f(static_cast<double>(i - 1) + frac);
    }
  }
}

}  // namespace

double zero_crossing_frequency(std::span<const double> x, double rate_hz) {
  double first = -1.0, last = -1.0;
  std::size_t count = 0;
  for_each_upward_crossing(x, [&](double at) {
    if (count == 0) first = at;
    last = at;
    ++count;
  });
  if (count < 2) return 0.0;
  return static_cast<double>(count - 1) * rate_hz / (last - first);
}

std::size_t upward_zero_crossings(std::span<const double> x) {
  std::size_t count = 0;
  for_each_upward_crossing(x, [&](double) { ++count; });
  return count;
}

std::size_t count_peaks(std::span<const double> x, double h) {
  if (x.empty()) return 0;
  std::size_t count = 0;
  bool rising = false;
  double trough = x[0];
  double peak = x[0];
  for (const double v : x) {
    if (!rising) {
      trough = std::min(trough, v);
      if (v >= trough + h) {
        rising = true;
        peak = v;
      }
    } else if (v > peak) {
      peak = v;
    } else if (v <= peak - h) {
      ++count;
      rising = false;
      trough = v;
    }
  }
  return count;
}

double mean_abs_sine(std::size_t points) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double phase = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) /
                         static_cast<double>(points);
    sum += std::abs(std::sin(phase));
  }
  return sum / static_cast<double>(points);
}

std::vector<float> read_f32(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string("cannot open ") + path);
  const std::vector<char> bytes{std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>()};
  std::vector<float> out(bytes.size() / 4);
  std::memcpy(out.data(), bytes.data(), out.size() * 4);
  return out;
}

}  // namespace ksf::oracle
