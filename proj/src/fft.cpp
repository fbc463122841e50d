#include "fft.hpp"

#include <fftw3.h>

#include <array>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace snls::detail {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per (dim, n, sign) under a lock and never freed.
class PlanCache {
 public:
  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::array<int, 4> dims{n, n, n, n};
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(dim, dims.data(), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft_inplace(const GridSpec& grid, std::complex<double>* data, int sign) {
  fftw_plan plan = cache().get(grid.dim(), static_cast<int>(grid.points_per_axis()),
                               sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace snls::detail
