#pragma once

#include <string>
#include <vector>

#include "kroncov/matcore.hpp"

namespace kroncov {

// Ordered factor dimensions (n_1, ..., n_v) plus the number of appended
// pseudo-variables. The Kronecker product acts on n_effective = prod(dims)
// coordinates of which the first data_dim() are real.
struct FactorizationSpec {
    std::vector<int> dims;
    int pad = 0;

    int v() const { return static_cast<int>(dims.size()); }
    long n_effective() const;
    long data_dim() const { return n_effective() - pad; }
    bool is_binary() const;
    void validate() const;
    std::string to_string() const;  // e.g. "2x2x2" or "2x2x2+pad3"
};

// Column layout of the per-factor parameter blocks backing E_star.
//
// All-binary specs use the two-parameter factor form [[a, b], [b, a]] whose
// vech is (a, b, a); anything else parameterizes each factor by the full
// vech of its symmetric log, n_j(n_j+1)/2 coordinates.
struct FactorBlocks {
    std::vector<int> offset;  // start of factor j's block
    std::vector<int> size;    // block width
    int total = 0;
};

// The linear design: vech(sum_j I (x) ... (x) Omega_j (x) ... (x) I) as a
// sparse map of the stacked factor parameters (E_star), its identified
// reduction E, and a basis of the identity-shift null space of E_star.
//
// Identified coordinates: theta = (tau, factor blocks), where tau is the
// average-trace scalar (Omega has diagonal contribution tau * I_n) and each
// factor block carries the trace-free coordinates of its log: for binary
// specs just b_j, otherwise vech minus the last diagonal entry, diagonal
// coordinates measured as deviations from the factor's trace mean.
struct DesignMatrix {
    FactorizationSpec spec;
    SparseMatrix E_star;
    SparseMatrix E;
    Matrix null_basis;        // columns span ker(E_star)
    FactorBlocks star_blocks; // layout of E_star columns
    FactorBlocks theta_blocks;// layout of E columns after the leading tau

    int n() const { return static_cast<int>(spec.n_effective()); }
    int q() const { return static_cast<int>(E.cols()); }

    static DesignMatrix build(const FactorizationSpec& spec);
};

SparseMatrix build_E_star(const FactorizationSpec& spec);

// Quotients E_star by the (v-1)-dimensional identity-shift null space.
// Returns the reduced design and the null-space basis.
std::pair<SparseMatrix, Matrix> reduce_E(const SparseMatrix& e_star, const FactorizationSpec& spec);

// theta <-> per-factor log matrices.
//
// unpack places the tau * I_n contribution on factor 1, so that
// sum_j I (x) A_j (x) I reproduces unvech(E theta) exactly.
std::vector<Matrix> unpack_theta(const DesignMatrix& dm, const Vector& theta);
Vector pack_factor_logs(const DesignMatrix& dm, const std::vector<Matrix>& logs);
// Maps stacked E_star coordinates onto the identified theta (the linear
// projection with E * project_to_theta(x) = E_star * x).
Vector project_to_theta(const DesignMatrix& dm, const Vector& x);

// Binary-case reparameterization between theta and factor correlations:
// rho_j = tanh(theta_{j+1}); theta_1 is recomputed as sum_j log(1-rho_j^2)/2.
Vector theta_to_rho(const DesignMatrix& dm, const Vector& theta);
Vector rho_to_theta(const DesignMatrix& dm, const Vector& rho);

// A Kronecker product of per-factor correlation matrices. Factors carry unit
// diagonals, so the product does too. Heavy objects (full matrix, inverse,
// log) are materialized on demand only.
class KroneckerCorrelation {
public:
    explicit KroneckerCorrelation(std::vector<Matrix> factors);

    const std::vector<Matrix>& factors() const { return factors_; }
    int dim() const;

    Matrix full() const;                  // materialized product (dim <= kMaxDim)
    Matrix inverse() const;               // product of factor inverses
    Matrix log_full() const;              // sum of embedded factor logs
    double logdet() const;
    Vector apply_inverse(const Vector& x) const;
    Vector eigenvalues() const;           // products of factor eigenvalues, unsorted

private:
    std::vector<Matrix> factors_;
};

// exp of the factor logs at theta, each factor rescaled to unit diagonal.
// For binary specs this is the Kronecker correlation with rho_j = tanh(b_j).
KroneckerCorrelation theta_to_correlation(const DesignMatrix& dm, const Vector& theta);

}  // namespace kroncov
