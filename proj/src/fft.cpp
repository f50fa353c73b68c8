#include "subconv/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

namespace subconv::fft {

namespace {

enum class PlanKind { forward, backward, r2c, c2r, redft10, redft01 };

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(PlanKind kind, std::size_t n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(kind, n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const int len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    switch (kind) {
      case PlanKind::forward:
      case PlanKind::backward: {
        auto* a = fftw_alloc_complex(n);
        auto* b = fftw_alloc_complex(n);
        plan = fftw_plan_dft_1d(len, a, b, kind == PlanKind::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                flags);
        fftw_free(a);
        fftw_free(b);
        break;
      }
      case PlanKind::r2c: {
        auto* a = fftw_alloc_real(n);
        auto* b = fftw_alloc_complex(n / 2 + 1);
        plan = fftw_plan_dft_r2c_1d(len, a, b, flags);
        fftw_free(a);
        fftw_free(b);
        break;
      }
      case PlanKind::c2r: {
        auto* a = fftw_alloc_complex(n / 2 + 1);
        auto* b = fftw_alloc_real(n);
        plan = fftw_plan_dft_c2r_1d(len, a, b, flags);
        fftw_free(a);
        fftw_free(b);
        break;
      }
      case PlanKind::redft10:
      case PlanKind::redft01: {
        auto* a = fftw_alloc_real(n);
        auto* b = fftw_alloc_real(n);
        plan = fftw_plan_r2r_1d(len, a, b, kind == PlanKind::redft10 ? FFTW_REDFT10 : FFTW_REDFT01,
                                flags);
        fftw_free(a);
        fftw_free(b);
        break;
      }
    }
    if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<PlanKind, std::size_t>, fftw_plan> plans_;
};

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

void require_nonempty(std::size_t n) {
  if (n == 0) throw InvalidArgument("fft: length must be positive");
}

}  // namespace

ComplexVector forward(const ComplexVector& in) {
  require_nonempty(in.size());
  ComplexVector src = in;
  ComplexVector out(in.size());
  fftw_execute_dft(PlanCache::instance().get(PlanKind::forward, in.size()), as_fftw(src.data()),
                   as_fftw(out.data()));
  return out;
}

ComplexVector backward(const ComplexVector& in) {
  require_nonempty(in.size());
  ComplexVector src = in;
  ComplexVector out(in.size());
  fftw_execute_dft(PlanCache::instance().get(PlanKind::backward, in.size()), as_fftw(src.data()),
                   as_fftw(out.data()));
  return out;
}

ComplexVector forward_real(const Vector& in) {
  const std::size_t n = in.size();
  require_nonempty(n);
  Vector src = in;
  ComplexVector out(n / 2 + 1);
  fftw_execute_dft_r2c(PlanCache::instance().get(PlanKind::r2c, n), src.data(),
                       as_fftw(out.data()));
  return out;
}

Vector inverse_real(const ComplexVector& half_spectrum, std::size_t n) {
  require_nonempty(n);
  if (static_cast<std::size_t>(half_spectrum.size()) != n / 2 + 1)
    throw InvalidArgument("fft: half spectrum has wrong length");
  ComplexVector src = half_spectrum;  // c2r clobbers its input
  Vector out(n);
  fftw_execute_dft_c2r(PlanCache::instance().get(PlanKind::c2r, n), as_fftw(src.data()),
                       out.data());
  out /= static_cast<double>(n);
  return out;
}

Vector dct(const Vector& in) {
  const std::size_t n = in.size();
  require_nonempty(n);
  Vector src = in;
  Vector out(n);
  fftw_execute_r2r(PlanCache::instance().get(PlanKind::redft10, n), src.data(), out.data());
  // FFTW's REDFT10 is 2x the unnormalized DCT-II.
  const double scale = std::sqrt(1.0 / (2.0 * static_cast<double>(n)));
  out *= scale;
  out[0] /= std::sqrt(2.0);
  return out;
}

Vector idct(const Vector& in) {
  const std::size_t n = in.size();
  require_nonempty(n);
  Vector src = in;
  src[0] *= std::sqrt(2.0);
  Vector out(n);
  fftw_execute_r2r(PlanCache::instance().get(PlanKind::redft01, n), src.data(), out.data());
  out *= std::sqrt(1.0 / (2.0 * static_cast<double>(n)));
  return out;
}

}  // namespace subconv::fft
