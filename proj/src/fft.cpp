#include "nisr/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace nisr::fft {

namespace {

struct PlanKey {
  int depth;
  int rows;
  int cols;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const PlanKey& key) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // FFTW_ESTIMATE leaves the scratch buffer untouched; FFTW_UNALIGNED lets the
    // plan run on any std::vector storage via the new-array execute interface.
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(key.depth) * key.rows * key.cols);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = key.depth == 1
                         ? fftw_plan_dft_2d(key.rows, key.cols, buf, buf, key.sign, flags)
                         : fftw_plan_dft_3d(key.depth, key.rows, key.cols, buf, buf, key.sign, flags);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void run(std::complex<double>* data, int depth, int rows, int cols, int sign) {
  if (rows <= 0 || cols <= 0 || depth <= 0) throw InvalidArgument("empty transform");
  fftw_plan plan = cache().get({depth, rows, cols, sign});
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buf, buf);
}

void check_volume(std::span<std::complex<double>> data, int depth, int rows, int cols) {
  if (data.size() != static_cast<std::size_t>(depth) * rows * cols) {
    throw InvalidArgument("volume size does not match its shape");
  }
}

}  // namespace

void forward_2d(ComplexGrid& data) { run(data.data(), 1, data.rows(), data.cols(), FFTW_FORWARD); }

void inverse_2d(ComplexGrid& data) { run(data.data(), 1, data.rows(), data.cols(), FFTW_BACKWARD); }

ComplexGrid forward_2d(const RealGrid& data) {
  ComplexGrid out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i];
  forward_2d(out);
  return out;
}

void forward_3d(std::span<std::complex<double>> data, int depth, int rows, int cols) {
  check_volume(data, depth, rows, cols);
  run(data.data(), depth, rows, cols, FFTW_FORWARD);
}

void inverse_3d(std::span<std::complex<double>> data, int depth, int rows, int cols) {
  check_volume(data, depth, rows, cols);
  run(data.data(), depth, rows, cols, FFTW_BACKWARD);
}

double frequency(int k, int n) {
  const int signed_k = k < (n + 1) / 2 ? k : k - n;
  return static_cast<double>(signed_k) / n;
}

}  // namespace nisr::fft
