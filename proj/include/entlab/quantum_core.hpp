#pragma once

// Two-qubit states over {|0⟩,|1⟩} ⊗ {|0⟩,|1⟩}: anti-Stokes photon first,
// atom (equivalently the retrieved Stokes photon) second. Logical |1⟩ of the
// second factor stands for the atomic |−1⟩ excitation.

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace entlab {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

inline constexpr double kPsdTolerance = 1e-10;

class PureTwoQubit {
 public:
  // Throws InvalidArgument unless the squared norm is 1 within 1e-12.
  explicit PureTwoQubit(const Vec4& amplitudes);
  // Normalizes; throws on a zero or non-finite vector.
  static PureTwoQubit normalized(const Vec4& amplitudes);

  const Vec4& amplitudes() const { return amplitudes_; }

 private:
  Vec4 amplitudes_;
};

class TwoQubitState {
 public:
  // Validates Hermiticity, unit trace and positivity (tolerance 1e-10).
  explicit TwoQubitState(const Mat4& matrix);
  static TwoQubitState from_pure(const PureTwoQubit& psi);
  static TwoQubitState maximally_mixed();

  const Mat4& matrix() const { return matrix_; }

 private:
  Mat4 matrix_;
};

// Throws InvalidArgument with the violated invariant named.
void check_density_matrix(const Mat4& m, double tolerance = kPsdTolerance);

enum class BasisLabel { zero, one, plus, minus, u, d };

std::string_view to_string(BasisLabel label);
std::optional<BasisLabel> parse_basis_label(std::string_view text);

class MeasBasisState {
 public:
  MeasBasisState(BasisLabel label);  // NOLINT: implicit by intent
  // Custom α|0⟩ + β|1⟩, normalized on construction.
  MeasBasisState(Complex alpha, Complex beta);

  const Vec2& ket() const { return ket_; }
  std::optional<BasisLabel> label() const { return label_; }

 private:
  Vec2 ket_;
  std::optional<BasisLabel> label_;
};

// (|00⟩ + γ|11⟩)/√(1+|γ|²).
PureTwoQubit psi_gamma(Complex gamma);

// ⟨ab|ρ|ab⟩, clipped to [0, 1] when within 1e-10 of the boundary.
double born_probability(const TwoQubitState& state, const MeasBasisState& a,
                        const MeasBasisState& b);

double purity(const TwoQubitState& state);
double fidelity_to_pure(const TwoQubitState& state, const PureTwoQubit& target);
double trace_distance(const Mat4& a, const Mat4& b);

Vec4 product_ket(const Vec2& a, const Vec2& b);
Mat4 kron(const Mat2& a, const Mat2& b);

// Local-unitary conjugation (U_a ⊗ U_b) ρ (U_a ⊗ U_b)†.
Mat4 apply_local(const Mat4& rho, const Mat2& ua, const Mat2& ub);

// Exchange of the two subsystems.
Mat4 swap_operator();

// Nearest density matrix in the eigenvalue sense: Hermitian part, negative
// eigenvalues clipped to zero, trace renormalized.
Mat4 project_to_density(const Mat4& m);

// --- Truncated source state -------------------------------------------------

struct SourceSpectrum {
  std::map<int, Complex> coefficients;  // C_m, |m| ≤ m_max
  double excitation_probability = 6.6e-3;
  int m_max = 1;

  // Σ|C_m|² = 1 within 1e-10 and excitation_probability ∈ (0, 0.1].
  void validate() const;
};

// Post-selected one-excitation component Σ C_m |m⟩_AS |−m⟩_a on the
// (2 m_max + 1)² product space. Index of |m_as⟩|m_atom⟩ is
// (m_as + m_max)·dim + (m_atom + m_max).
struct QuditPairState {
  int m_max = 0;
  Eigen::VectorXcd amplitudes;

  int dim() const { return 2 * m_max + 1; }
  Complex amplitude(int m_as, int m_atom) const;
};

QuditPairState truncated_source_state(const SourceSpectrum& spectrum);

// Restriction to span{|0⟩|0⟩, |+1⟩|−1⟩} mapped onto the two-qubit basis.
// Throws DomainError when the state has weight outside that span.
PureTwoQubit embed_two_qubit(const QuditPairState& state, double tolerance = 1e-12);

// Von Neumann entropy (bits) of the anti-Stokes reduced state.
double entanglement_entropy(const QuditPairState& state);

}  // namespace entlab
