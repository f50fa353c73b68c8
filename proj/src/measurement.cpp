#include "subconv/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "subconv/fft.hpp"
#include "subconv/rng.hpp"

namespace subconv {

void require_finite(const Vector& x, const std::string& what) {
  if (x.size() == 0) throw InvalidArgument(what + ": empty vector");
  if (!x.allFinite()) throw InvalidArgument(what + ": non-finite entry");
}

void require_same_size(const Vector& a, const Vector& b, const std::string& what) {
  if (a.size() != b.size())
    throw InvalidArgument(what + ": dimension mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
}

Vector circular_convolve(const Vector& x, const Vector& xi) {
  require_same_size(x, xi, "circular_convolve");
  if (x.size() == 0) throw InvalidArgument("circular_convolve: n must be positive");
  require_finite(x, "circular_convolve");
  require_finite(xi, "circular_convolve");
  const ComplexVector prod =
      fft::forward(x.cast<Complex>()).cwiseProduct(fft::forward(xi.cast<Complex>()));
  const ComplexVector out = fft::backward(prod) / static_cast<double>(x.size());
  const double scale = x.norm() * xi.norm();
  if (out.imag().norm() > 1e-10 * std::max(scale, 1e-300) && scale > 0)
    throw std::runtime_error("circular_convolve: imaginary residue above tolerance");
  return out.real();
}

Vector circular_convolve_naive(const Vector& x, const Vector& xi) {
  require_same_size(x, xi, "circular_convolve_naive");
  const std::size_t n = x.size();
  if (n == 0) throw InvalidArgument("circular_convolve_naive: n must be positive");
  if (n > kNaiveConvolutionCap) throw InvalidArgument("circular_convolve_naive: n above cap");
  require_finite(x, "circular_convolve_naive");
  require_finite(xi, "circular_convolve_naive");
  Vector out = Vector::Zero(n);
  for (std::size_t k = 0; k < n; ++k) {
    // (k - j) mod n, split at the wrap-around instead of taking a modulus.
    double acc = 0.0;
    for (std::size_t j = 0; j <= k; ++j) acc += x[j] * xi[k - j];
    for (std::size_t j = k + 1; j < n; ++j) acc += x[j] * xi[k + n - j];
    out[k] = acc;
  }
  return out;
}

bool SelectorMask::contains(std::size_t i) const {
  return std::binary_search(omega.begin(), omega.end(), i);
}

SelectorMask make_selector_mask(std::size_t n, double delta, std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("make_selector_mask: delta outside (0,1]");
  if (n == 0) throw InvalidArgument("make_selector_mask: n must be positive");
  SelectorMask mask{n, delta, seed, {}};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < delta) mask.omega.push_back(i);
  }
  return mask;
}

SelectorMask full_mask(std::size_t n) {
  SelectorMask mask{n, 1.0, 0, std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) mask.omega[i] = i;
  return mask;
}

SelectorMask mask_from_indices(std::size_t n, std::vector<std::size_t> omega, double delta,
                               std::uint64_t seed) {
  for (std::size_t k = 0; k < omega.size(); ++k) {
    if (omega[k] >= n) throw InvalidArgument("mask: index out of range");
    if (k > 0 && omega[k] <= omega[k - 1]) throw InvalidArgument("mask: indices must be strictly increasing");
  }
  return SelectorMask{n, delta, seed, std::move(omega)};
}

// ---------------------------------------------------------------------------

CirculantOperator::CirculantOperator(Vector xi) : xi_(std::move(xi)) {
  require_finite(xi_, "CirculantOperator");
  spectrum_ = fft::forward_real(xi_);
}

Vector CirculantOperator::apply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != size()) throw InvalidArgument("CirculantOperator::apply: dimension mismatch");
  return fft::inverse_real(fft::forward_real(x).cwiseProduct(spectrum_), size());
}

Vector CirculantOperator::adjoint(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != size()) throw InvalidArgument("CirculantOperator::adjoint: dimension mismatch");
  return fft::inverse_real(fft::forward_real(y).cwiseProduct(spectrum_.conjugate()), size());
}

double CirculantOperator::operator_norm() const { return spectrum_.cwiseAbs().maxCoeff(); }

PartialCirculantOperator::PartialCirculantOperator(CirculantOperator circ, SelectorMask mask)
    : circ_(std::move(circ)), mask_(std::move(mask)) {
  if (mask_.n != circ_.size()) throw InvalidArgument("PartialCirculantOperator: mask dimension mismatch");
}

Vector PartialCirculantOperator::apply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != cols()) throw InvalidArgument("apply_partial: dimension mismatch");
  Vector out(rows());
  if (rows() == 0) return out;
  const Vector full = circ_.apply(x);
  for (std::size_t k = 0; k < rows(); ++k) out[k] = full[mask_.omega[k]];
  return out;
}

Vector PartialCirculantOperator::adjoint(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != rows()) throw InvalidArgument("adjoint_partial: dimension mismatch");
  Vector filled = Vector::Zero(cols());
  if (rows() == 0) return filled;
  for (std::size_t k = 0; k < rows(); ++k) filled[mask_.omega[k]] = y[k];
  return circ_.adjoint(filled);
}

Matrix PartialCirculantOperator::materialize(std::size_t cap) const {
  const std::size_t n = cols();
  if (n > cap) throw InvalidArgument("materialize: dimension above cap");
  const Vector& xi = circ_.generator();
  Matrix out(rows(), n);
  for (std::size_t k = 0; k < rows(); ++k)
    for (std::size_t j = 0; j < n; ++j) out(k, j) = xi[(mask_.omega[k] + n - j) % n];
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(HadamardKind kind) {
  switch (kind) {
    case HadamardKind::dft: return "dft";
    case HadamardKind::inverse_dft: return "inverse_dft";
    case HadamardKind::walsh_hadamard: return "walsh_hadamard";
    case HadamardKind::dct: return "dct";
  }
  return "unknown";
}

void fwht(double* data, std::size_t n) {
  for (std::size_t h = 1; h < n; h *= 2) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = data[j];
        const double b = data[j + h];
        data[j] = a + b;
        data[j + h] = a - b;
      }
    }
  }
}

HadamardTypeMatrix::HadamardTypeMatrix(std::size_t n, HadamardKind kind) : n_(n), kind_(kind) {
  if (n == 0) throw InvalidArgument("make_hadamard_type: n must be positive");
  if (kind == HadamardKind::walsh_hadamard && !std::has_single_bit(n))
    throw InvalidArgument("make_hadamard_type: Walsh-Hadamard requires n a power of two");
  beta_ = (kind == HadamardKind::dct && n > 1) ? std::numbers::sqrt2 : 1.0;
}

namespace {

template <typename RealMap>
ComplexVector apply_real_parts(const ComplexVector& z, RealMap&& map) {
  const Vector re = map(Vector(z.real()));
  const Vector im = map(Vector(z.imag()));
  ComplexVector out(z.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

Vector normalized_fwht(Vector v) {
  fwht(v.data(), v.size());
  return v / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

ComplexVector HadamardTypeMatrix::apply(const ComplexVector& z) const {
  if (static_cast<std::size_t>(z.size()) != n_) throw InvalidArgument("HadamardTypeMatrix::apply: dimension mismatch");
  const double norm = std::sqrt(static_cast<double>(n_));
  switch (kind_) {
    case HadamardKind::dft: return fft::forward(z) / norm;
    case HadamardKind::inverse_dft: return fft::backward(z) / norm;
    case HadamardKind::walsh_hadamard: return apply_real_parts(z, normalized_fwht);
    case HadamardKind::dct: return apply_real_parts(z, [](const Vector& v) { return fft::dct(v); });
  }
  return z;
}

ComplexVector HadamardTypeMatrix::apply_adjoint(const ComplexVector& z) const {
  if (static_cast<std::size_t>(z.size()) != n_) throw InvalidArgument("HadamardTypeMatrix::apply_adjoint: dimension mismatch");
  const double norm = std::sqrt(static_cast<double>(n_));
  switch (kind_) {
    case HadamardKind::dft: return fft::backward(z) / norm;
    case HadamardKind::inverse_dft: return fft::forward(z) / norm;
    case HadamardKind::walsh_hadamard: return apply_real_parts(z, normalized_fwht);
    case HadamardKind::dct: return apply_real_parts(z, [](const Vector& v) { return fft::idct(v); });
  }
  return z;
}

Complex HadamardTypeMatrix::entry(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw InvalidArgument("HadamardTypeMatrix::entry: index out of range");
  const double n = static_cast<double>(n_);
  const double inv_root = 1.0 / std::sqrt(n);
  switch (kind_) {
    case HadamardKind::dft:
    case HadamardKind::inverse_dft: {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((i * j) % n_) / n;
      const double sign = kind_ == HadamardKind::dft ? -1.0 : 1.0;
      return std::polar(inv_root, sign * phase);
    }
    case HadamardKind::walsh_hadamard:
      return (std::popcount(i & j) % 2 == 0) ? inv_root : -inv_root;
    case HadamardKind::dct: {
      const double c = (i == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      return c * std::cos(std::numbers::pi * static_cast<double>((2 * j + 1) * i) / (2.0 * n));
    }
  }
  return 0.0;
}

ComplexVector HadamardTypeMatrix::row(std::size_t i) const {
  ComplexVector out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = entry(i, j);
  return out;
}

ComplexMatrix HadamardTypeMatrix::materialize(std::size_t cap) const {
  if (n_ > cap) throw InvalidArgument("HadamardTypeMatrix::materialize: dimension above cap");
  ComplexMatrix out(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out(i, j) = entry(i, j);
  return out;
}

HadamardTypeMatrix make_hadamard_type(std::size_t n, HadamardKind kind) {
  return HadamardTypeMatrix(n, kind);
}

double HadamardTriple::beta() const { return std::max({u.beta(), w.beta(), o.beta()}); }

bool HadamardTriple::real_valued() const {
  if (u.is_real() && w.is_real() && o.is_real()) return true;
  return u.kind() == HadamardKind::inverse_dft && w.kind() == HadamardKind::dft &&
         o.kind() == HadamardKind::dft;
}

HadamardTriple fourier_triple(std::size_t n) {
  return HadamardTriple{HadamardTypeMatrix(n, HadamardKind::inverse_dft),
                        HadamardTypeMatrix(n, HadamardKind::dft),
                        HadamardTypeMatrix(n, HadamardKind::dft)};
}

HadamardTriple uniform_triple(std::size_t n, HadamardKind kind) {
  if (kind == HadamardKind::dft || kind == HadamardKind::inverse_dft) return fourier_triple(n);
  return HadamardTriple{HadamardTypeMatrix(n, kind), HadamardTypeMatrix(n, kind),
                        HadamardTypeMatrix(n, kind)};
}

// ---------------------------------------------------------------------------

GammaOperator::GammaOperator(HadamardTriple triple, const Vector& v) : triple_(std::move(triple)) {
  const std::size_t n = triple_.size();
  if (triple_.w.size() != n || triple_.o.size() != n)
    throw InvalidArgument("GammaOperator: triple dimension mismatch");
  if (static_cast<std::size_t>(v.size()) != n) throw InvalidArgument("GammaOperator: v dimension mismatch");
  require_finite(v, "GammaOperator");
  v_norm_ = v.norm();
  diag_ = triple_.w.apply(v.cast<Complex>());
}

ComplexVector GammaOperator::apply_complex(const ComplexVector& z) const {
  if (static_cast<std::size_t>(z.size()) != size()) throw InvalidArgument("gamma_apply: dimension mismatch");
  const ComplexVector inner = diag_.cwiseProduct(triple_.o.apply(z));
  return triple_.u.apply(inner) * std::sqrt(static_cast<double>(size()));
}

Vector GammaOperator::apply(const Vector& z) const {
  if (!triple_.real_valued()) throw InvalidArgument("gamma_apply: composition is not real-valued");
  const ComplexVector out = apply_complex(z.cast<Complex>());
  const double scale = std::sqrt(static_cast<double>(size())) * v_norm_ * z.norm();
  if (scale > 0 && out.imag().norm() > 1e-10 * scale)
    throw std::runtime_error("gamma_apply: imaginary residue above tolerance");
  return out.real();
}

ComplexVector GammaOperator::adjoint_row(std::size_t i) const {
  if (i >= size()) throw InvalidArgument("GammaOperator::adjoint_row: index out of range");
  ComplexVector e = ComplexVector::Zero(size());
  e[i] = 1.0;
  const ComplexVector inner = diag_.conjugate().cwiseProduct(triple_.u.apply_adjoint(e));
  return triple_.o.apply_adjoint(inner) * std::sqrt(static_cast<double>(size()));
}

ComplexMatrix GammaOperator::materialize(std::size_t cap) const {
  const std::size_t n = size();
  if (n > cap) throw InvalidArgument("gamma_materialize: dimension above cap");
  ComplexMatrix out(n, n);
  ComplexVector e = ComplexVector::Zero(n);
  for (std::size_t j = 0; j < n; ++j) {
    e.setZero();
    e[j] = 1.0;
    out.col(j) = apply_complex(e);
  }
  return out;
}

Vector gamma_apply(const HadamardTriple& triple, const Vector& v, const Vector& z) {
  return GammaOperator(triple, v).apply(z);
}

ComplexMatrix gamma_materialize(const HadamardTriple& triple, const Vector& v, std::size_t cap) {
  if (triple.size() > cap) throw InvalidArgument("gamma_materialize: dimension above cap");
  return GammaOperator(triple, v).materialize(cap);
}

}  // namespace subconv
