#pragma once

// Circular convolution, subsampled (partial circulant) measurement operators,
// Hadamard-type matrices and the Gamma_v = sqrt(n) U D_{Wv} O family.
//
// Indices are stored 0-based. The convolution convention is
//   (x * xi)_k = sum_j x_j xi_{(k - j) mod n}
// which is the 1-based (k-j mod n)+1 convention shifted down by one, so that
// convolving e_1 (index 0) with xi returns xi.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "subconv/types.hpp"

namespace subconv {

inline constexpr std::size_t kNaiveConvolutionCap = 4096;
inline constexpr std::size_t kMaterializationCap = 512;

/// Circular convolution via length-n FFTs.
Vector circular_convolve(const Vector& x, const Vector& xi);

/// O(n^2) direct evaluation of the same sum. Test oracle; n <= 4096.
Vector circular_convolve_naive(const Vector& x, const Vector& xi);

/// Random coordinate selection by independent Bernoulli(delta) selectors.
struct SelectorMask {
  std::size_t n = 0;
  double delta = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> omega;  // sorted, 0-based

  std::size_t size() const { return omega.size(); }
  bool contains(std::size_t i) const;
};

/// Draws selector i as [u_i < delta] for u_i ~ U[0,1) from the seeded stream.
/// Masks with the same seed are therefore nested in delta.
SelectorMask make_selector_mask(std::size_t n, double delta, std::uint64_t seed);

/// Omega = all of [n].
SelectorMask full_mask(std::size_t n);

/// Builds a mask from explicit 0-based indices (validated, sorted, deduplicated check).
SelectorMask mask_from_indices(std::size_t n, std::vector<std::size_t> omega, double delta,
                               std::uint64_t seed);

/// Full circulant matrix generated by xi, applied through its cached spectrum.
class CirculantOperator {
 public:
  explicit CirculantOperator(Vector xi);

  std::size_t size() const { return static_cast<std::size_t>(xi_.size()); }
  const Vector& generator() const { return xi_; }
  /// Half spectrum (n/2+1 coefficients) of the generator.
  const ComplexVector& spectrum() const { return spectrum_; }

  /// x * xi
  Vector apply(const Vector& x) const;
  /// Correlation with xi, the transpose of apply.
  Vector adjoint(const Vector& y) const;

  /// Largest singular value, max_k |xi_hat_k|.
  double operator_norm() const;

 private:
  Vector xi_;
  ComplexVector spectrum_;
};

/// B x = P_Omega (x * xi).
class PartialCirculantOperator {
 public:
  PartialCirculantOperator(CirculantOperator circ, SelectorMask mask);

  std::size_t rows() const { return mask_.size(); }
  std::size_t cols() const { return circ_.size(); }
  const CirculantOperator& circulant() const { return circ_; }
  const SelectorMask& mask() const { return mask_; }

  /// Restriction of x * xi to Omega, in sorted index order.
  Vector apply(const Vector& x) const;
  /// Zero-fill on the complement of Omega, then correlate with xi.
  Vector adjoint(const Vector& y) const;

  /// Dense m x n matrix (n <= kMaterializationCap unless `cap` raised).
  Matrix materialize(std::size_t cap = kMaterializationCap) const;

 private:
  CirculantOperator circ_;
  SelectorMask mask_;
};

inline Vector apply_partial(const PartialCirculantOperator& b, const Vector& x) {
  return b.apply(x);
}
inline Vector adjoint_partial(const PartialCirculantOperator& b, const Vector& y) {
  return b.adjoint(y);
}

enum class HadamardKind { dft, inverse_dft, walsh_hadamard, dct };

const char* to_string(HadamardKind kind);

/// An orthogonal or unitary n x n matrix whose entries are bounded by beta/sqrt(n).
/// dft is n^{-1/2} F, inverse_dft its adjoint n^{-1/2} F^*, walsh_hadamard the
/// Sylvester-ordered normalized Hadamard matrix, dct the orthonormal DCT-II.
class HadamardTypeMatrix {
 public:
  HadamardTypeMatrix(std::size_t n, HadamardKind kind);

  std::size_t size() const { return n_; }
  HadamardKind kind() const { return kind_; }
  double beta() const { return beta_; }
  bool is_real() const { return kind_ == HadamardKind::walsh_hadamard || kind_ == HadamardKind::dct; }

  /// O z in O(n log n).
  ComplexVector apply(const ComplexVector& z) const;
  /// O^* z in O(n log n).
  ComplexVector apply_adjoint(const ComplexVector& z) const;

  Complex entry(std::size_t i, std::size_t j) const;
  ComplexVector row(std::size_t i) const;
  ComplexMatrix materialize(std::size_t cap = kMaterializationCap) const;

 private:
  std::size_t n_;
  HadamardKind kind_;
  double beta_;
};

HadamardTypeMatrix make_hadamard_type(std::size_t n, HadamardKind kind);

/// In-place unnormalized fast Walsh-Hadamard transform (length a power of two).
void fwht(double* data, std::size_t n);

struct HadamardTriple {
  HadamardTypeMatrix u;
  HadamardTypeMatrix w;
  HadamardTypeMatrix o;

  std::size_t size() const { return u.size(); }
  double beta() const;
  /// True when Gamma_v z is real for every real v, z.
  bool real_valued() const;
};

/// U = n^{-1/2} F^*, W = O = n^{-1/2} F. Gamma_v xi is then v * xi.
HadamardTriple fourier_triple(std::size_t n);
/// U = W = O = the given real kind.
HadamardTriple uniform_triple(std::size_t n, HadamardKind kind);

/// Gamma_v = sqrt(n) U D_{Wv} O with the diagonal cached.
class GammaOperator {
 public:
  GammaOperator(HadamardTriple triple, const Vector& v);

  std::size_t size() const { return triple_.size(); }
  const HadamardTriple& triple() const { return triple_; }
  const ComplexVector& diagonal() const { return diag_; }

  ComplexVector apply_complex(const ComplexVector& z) const;
  /// Real part of Gamma_v z; throws if the imaginary residue exceeds
  /// 1e-10 relative to sqrt(n) ||v||_2 ||z||_2.
  Vector apply(const Vector& z) const;
  /// Gamma_v^* e_i
  ComplexVector adjoint_row(std::size_t i) const;

  ComplexMatrix materialize(std::size_t cap = kMaterializationCap) const;

 private:
  HadamardTriple triple_;
  double v_norm_;
  ComplexVector diag_;  // <W_i, v>
};

Vector gamma_apply(const HadamardTriple& triple, const Vector& v, const Vector& z);
ComplexMatrix gamma_materialize(const HadamardTriple& triple, const Vector& v,
                                std::size_t cap = kMaterializationCap);

}  // namespace subconv
