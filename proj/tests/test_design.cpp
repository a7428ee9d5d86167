#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kroncov/design.hpp"
#include "kroncov/rng.hpp"
#include "oracles.hpp"

using namespace kroncov;

namespace {

FactorizationSpec spec_of(std::vector<int> dims, int pad = 0) {
    FactorizationSpec s;
    s.dims = std::move(dims);
    s.pad = pad;
    return s;
}

// Embedded-factor map assembled from the raw permutation identities:
// vech(I_m (x) Omega_i (x) I_p) as a composition of commutations and
// vec-identity insertions, evaluated densely. Independent route used to
// cross-check the direct index construction.
Matrix ei_formula(const std::vector<int>& dims, int i) {
    int v = static_cast<int>(dims.size());
    long m_prev = 1;
    for (int j = 0; j < i; ++j) m_prev *= dims[j];
    long m_i = m_prev * dims[i];
    long p_i = 1;
    for (int j = i + 1; j < v; ++j) p_i *= dims[j];
    long n = m_i * p_i;
    const int ni = dims[i];

    Matrix dn_plus = Matrix(pinv_duplication(static_cast<int>(n)));
    Matrix perm1 = Matrix(kron_commutation(static_cast<int>(m_i), static_cast<int>(p_i),
                                           static_cast<int>(m_i), static_cast<int>(p_i)));
    Matrix ins1 = Matrix::Zero(m_i * m_i * p_i * p_i, m_i * m_i);
    {
        Matrix ip = Matrix::Identity(static_cast<int>(p_i), static_cast<int>(p_i));
        Eigen::Map<Vector> vecip(ip.data(), p_i * p_i);
        for (long c = 0; c < m_i * m_i; ++c)
            for (long r = 0; r < p_i * p_i; ++r) ins1(c * p_i * p_i + r, c) = vecip(r);
    }
    Matrix perm2 = Matrix(kron_commutation(static_cast<int>(m_prev), ni,
                                           static_cast<int>(m_prev), ni));
    Matrix ins2 = Matrix::Zero(m_prev * m_prev * ni * ni, ni * ni);
    {
        Matrix im = Matrix::Identity(static_cast<int>(m_prev), static_cast<int>(m_prev));
        Eigen::Map<Vector> vecim(im.data(), m_prev * m_prev);
        for (long r = 0; r < m_prev * m_prev; ++r)
            for (long c = 0; c < ni * ni; ++c) ins2(r * ni * ni + c, c) = vecim(r);
    }
    Matrix dni = Matrix(duplication(ni));
    return dn_plus * perm1 * ins1 * perm2 * ins2 * dni;
}

}  // namespace

TEST_CASE("E_star for the triple binary factorization") {
    SparseMatrix e = build_E_star(spec_of({2, 2, 2}));
    CHECK(e.rows() == 36);
    CHECK(e.cols() == 6);
    Matrix gram = Matrix(SparseMatrix(e.transpose() * e));
    Matrix expect(6, 6);
    expect << 8, 0, 8, 0, 8, 0,
              0, 4, 0, 0, 0, 0,
              8, 0, 8, 0, 8, 0,
              0, 0, 0, 4, 0, 0,
              8, 0, 8, 0, 8, 0,
              0, 0, 0, 0, 0, 4;
    CHECK((gram - expect).cwiseAbs().maxCoeff() == 0.0);

    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    Vector want(6);
    want << 0, 0, 4, 4, 4, 24;
    CHECK((es.eigenvalues() - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("E_star for a single binary factor") {
    Matrix e = Matrix(build_E_star(spec_of({2})));
    Matrix expect(3, 2);
    expect << 1, 0, 0, 1, 1, 0;
    CHECK((e - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("binary column sparsity pattern") {
    for (int v : {2, 3, 4}) {
        FactorizationSpec spec = spec_of(std::vector<int>(v, 2));
        SparseMatrix e = build_E_star(spec);
        long n = spec.n_effective();
        for (int j = 0; j < v; ++j) {
            CHECK(e.col(2 * j).nonZeros() == n);          // a_j columns
            CHECK(e.col(2 * j + 1).nonZeros() == n / 2);  // b_j columns
        }
    }
}

TEST_CASE("E_star reproduces embedded factor logs constructively") {
    Rng rng(31, 0);
    for (auto dims : std::vector<std::vector<int>>{{2, 2}, {3, 2}, {2, 3, 2}, {4}}) {
        FactorizationSpec spec = spec_of(dims);
        DesignMatrix dm = DesignMatrix::build(spec);
        bool binary = spec.is_binary();
        std::vector<Matrix> omegas;
        Vector coords(dm.star_blocks.total);
        for (int j = 0; j < spec.v(); ++j) {
            Matrix a = oracles::random_symmetric(spec.dims[j], rng).mat();
            if (binary) {
                a(1, 1) = a(0, 0);
                coords(dm.star_blocks.offset[j]) = a(0, 0);
                coords(dm.star_blocks.offset[j] + 1) = a(1, 0);
            } else {
                coords.segment(dm.star_blocks.offset[j], dm.star_blocks.size[j]) = vech(a);
            }
            omegas.push_back(a);
        }
        long n = spec.n_effective();
        Matrix sum = Matrix::Zero(n, n);
        long pre = 1, post = n;
        for (int j = 0; j < spec.v(); ++j) {
            post /= spec.dims[j];
            std::vector<Matrix> blocks;
            blocks.push_back(Matrix::Identity(pre, pre));
            blocks.push_back(omegas[j]);
            blocks.push_back(Matrix::Identity(post, post));
            sum += kron_chain(blocks);
            pre *= spec.dims[j];
        }
        Vector lhs = dm.E_star * coords;
        CHECK((lhs - vech(sum)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("direct construction matches the permutation-identity formula") {
    for (auto dims : std::vector<std::vector<int>>{{2, 3}, {3, 2}, {2, 2, 2}}) {
        FactorizationSpec spec = spec_of(dims);
        SparseMatrix e_star = build_E_star(spec);
        DesignMatrix dm = DesignMatrix::build(spec);
        bool binary = spec.is_binary();
        for (int i = 0; i < spec.v(); ++i) {
            Matrix direct = Matrix(e_star).middleCols(dm.star_blocks.offset[i],
                                                      dm.star_blocks.size[i]);
            Matrix formula = ei_formula(dims, i);
            if (binary) {
                Matrix restrict(3, 2);
                restrict << 1, 0, 0, 1, 1, 0;
                formula = formula * restrict;
            }
            CHECK((direct - formula).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("reduced design for binary specs is diagonal with known weights") {
    for (int v = 1; v <= 8; ++v) {
        FactorizationSpec spec = spec_of(std::vector<int>(v, 2));
        DesignMatrix dm = DesignMatrix::build(spec);
        long n = spec.n_effective();
        CHECK(dm.q() == v + 1);
        Matrix gram = Matrix(SparseMatrix(dm.E.transpose() * dm.E));
        Matrix expect = Matrix::Zero(v + 1, v + 1);
        expect(0, 0) = static_cast<double>(n);
        for (int j = 1; j <= v; ++j) expect(j, j) = n / 2.0;
        CHECK((gram - expect).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("ranks of E_star and E") {
    {
        DesignMatrix dm = DesignMatrix::build(spec_of({2, 2, 2}));
        Eigen::FullPivLU<Matrix> lu(Matrix(dm.E_star));
        CHECK(lu.rank() == 4);
    }
    {
        DesignMatrix dm = DesignMatrix::build(spec_of({2, 2}));
        Matrix gram = Matrix(SparseMatrix(dm.E.transpose() * dm.E));
        CHECK(gram(0, 0) == 4.0);
        CHECK(gram(1, 1) == 2.0);
        CHECK(gram(2, 2) == 2.0);
        CHECK((gram - Matrix(gram.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        DesignMatrix dm = DesignMatrix::build(spec_of({4, 2}));
        CHECK(dm.q() == 12);
        Eigen::FullPivLU<Matrix> lu(Matrix(dm.E));
        CHECK(lu.rank() == 12);
        Eigen::FullPivLU<Matrix> lu_star(Matrix(dm.E_star));
        CHECK(lu_star.rank() == 12);
    }
}

TEST_CASE("null basis and quotient projection") {
    Rng rng(32, 0);
    for (auto dims : std::vector<std::vector<int>>{{2, 2, 2}, {3, 2}, {2, 4, 2}}) {
        DesignMatrix dm = DesignMatrix::build(spec_of(dims));
        if (dm.null_basis.cols() > 0) {
            Matrix image = dm.E_star * dm.null_basis;
            CHECK(image.cwiseAbs().maxCoeff() < 1e-14);
        }
        for (int rep = 0; rep < 5; ++rep) {
            Vector x(dm.star_blocks.total);
            for (int i = 0; i < x.size(); ++i) x(i) = rng.normal();
            Vector via_estar = dm.E_star * x;
            Vector via_e = dm.E * project_to_theta(dm, x);
            CHECK((via_estar - via_e).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("permuting factor dimensions relabels the design consistently") {
    Rng rng(33, 0);
    DesignMatrix a = DesignMatrix::build(spec_of({3, 2}));
    DesignMatrix b = DesignMatrix::build(spec_of({2, 3}));
    Matrix f3 = oracles::random_symmetric(3, rng).mat();
    Matrix f2 = oracles::random_symmetric(2, rng).mat();
    Vector xa(a.star_blocks.total), xb(b.star_blocks.total);
    xa << vech(f3), vech(f2);
    xb << vech(f2), vech(f3);
    Matrix ma = unvech(Vector(a.E_star * xa)).mat();
    Matrix mb = unvech(Vector(b.E_star * xb)).mat();
    // permutation sending index (i3, i2) to (i2, i3)
    Matrix p = Matrix::Zero(6, 6);
    for (int i3 = 0; i3 < 3; ++i3)
        for (int i2 = 0; i2 < 2; ++i2) p(i2 * 3 + i3, i3 * 2 + i2) = 1.0;
    CHECK((p * ma * p.transpose() - mb).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("theta and rho reparameterization") {
    DesignMatrix dm = DesignMatrix::build(spec_of({2, 2}));
    Vector rho(2);
    rho << 0.0, 0.0;
    Vector theta = rho_to_theta(dm, rho);
    CHECK(theta.cwiseAbs().maxCoeff() == 0.0);

    rho << 0.6, 0.0;
    theta = rho_to_theta(dm, rho);
    CHECK(theta(1) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
    CHECK(theta(0) == doctest::Approx(-0.22314355131420976).epsilon(1e-12));

    Rng rng(34, 0);
    DesignMatrix dm4 = DesignMatrix::build(spec_of({2, 2, 2, 2}));
    for (int rep = 0; rep < 100; ++rep) {
        Vector r(4);
        for (int j = 0; j < 4; ++j) r(j) = rng.uniform(-0.99, 0.99);
        Vector back = theta_to_rho(dm4, rho_to_theta(dm4, r));
        CHECK((back - r).cwiseAbs().maxCoeff() < 1e-12);
    }

    Vector bad(2);
    bad << 0.5, 1.0;
    CHECK_THROWS_AS(rho_to_theta(dm, bad), RhoOutOfRange);
}

TEST_CASE("theta_to_correlation basics") {
    DesignMatrix dm = DesignMatrix::build(spec_of({2, 2}));
    KroneckerCorrelation id = theta_to_correlation(dm, Vector::Zero(3));
    for (const Matrix& f : id.factors()) {
        CHECK((f - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    }

    Vector rho(2);
    rho << 0.3, 0.5;
    KroneckerCorrelation corr = theta_to_correlation(dm, rho_to_theta(dm, rho));
    Matrix full = corr.full();
    CHECK((full.diagonal().array() - 1.0).abs().maxCoeff() < 1e-14);
    int zeros = 0;
    Matrix lg = corr.log_full();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j && std::abs(lg(i, j)) < 1e-13) ++zeros;
    CHECK(zeros == 4 * (4 - 2 - 1));
}

TEST_CASE("zero pattern of the log for any binary theta") {
    Rng rng(35, 0);
    for (int v : {3, 4}) {
        DesignMatrix dm = DesignMatrix::build(spec_of(std::vector<int>(v, 2)));
        Vector theta(v + 1);
        for (int i = 0; i <= v; ++i) theta(i) = 0.3 * rng.normal();
        Matrix omega = unvech(Vector(dm.E * theta)).mat();
        long n = dm.n();
        for (int i = 0; i < n; ++i) {
            int zeros = 0;
            for (int j = 0; j < n; ++j)
                if (i != j && omega(i, j) == 0.0) ++zeros;
            CHECK(zeros == n - v - 1);
        }
    }
}

TEST_CASE("log of the materialized correlation lands back on the design") {
    Rng rng(36, 0);
    for (auto dims : std::vector<std::vector<int>>{{2, 2}, {2, 2, 2, 2}, {3, 2}}) {
        DesignMatrix dm = DesignMatrix::build(spec_of(dims));
        Vector theta(dm.q());
        for (int i = 0; i < theta.size(); ++i) theta(i) = 0.25 * rng.normal();
        KroneckerCorrelation corr = theta_to_correlation(dm, theta);
        Matrix lg = spd_log(SymMatrix::from(corr.full(), 1e-9)).mat();
        // the correlation rescale moves theta to the equivalent identified
        // point; recover that point from the factor logs and compare images
        std::vector<Matrix> factor_logs;
        for (const Matrix& f : corr.factors()) {
            factor_logs.push_back(spd_log(SymMatrix::from(f, 1e-12)).mat());
        }
        Vector theta_eq = pack_factor_logs(dm, factor_logs);
        CHECK((vech(lg) - Vector(dm.E * theta_eq)).cwiseAbs().maxCoeff() < 1e-10);
        if (dm.spec.is_binary()) {
            CHECK((theta_eq.tail(dm.q() - 1) - theta.tail(dm.q() - 1)).cwiseAbs().maxCoeff() <
                  1e-10);
        }
    }
}

TEST_CASE("kronecker correlation lazy quantities") {
    Rng rng(37, 0);
    DesignMatrix dm = DesignMatrix::build(spec_of({2, 2, 2}));
    Vector rho(3);
    rho << 0.3, 0.5, -0.4;
    KroneckerCorrelation corr = theta_to_correlation(dm, rho_to_theta(dm, rho));
    Matrix full = corr.full();
    CHECK((corr.inverse() - full.inverse()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(corr.logdet() == doctest::Approx(std::log(full.determinant())).epsilon(1e-10));
    Vector x(8);
    for (int i = 0; i < 8; ++i) x(i) = rng.normal();
    CHECK((corr.apply_inverse(x) - full.inverse() * x).cwiseAbs().maxCoeff() < 1e-11);
    Vector ev = corr.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size());
    SpdEigen eig = spd_eigen(SymMatrix::from(full, 1e-12));
    CHECK((ev - eig.eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(spec_of({1, 2}).validate(), BadInput);
    CHECK_THROWS_AS(spec_of({}).validate(), BadInput);
    CHECK_THROWS_AS(spec_of(std::vector<int>(13, 2)).validate(), DimensionOverflow);
    FactorizationSpec padded = spec_of({2, 2, 2}, 3);
    padded.validate();
    CHECK(padded.data_dim() == 5);
    CHECK(padded.to_string() == "2x2x2+pad3");
}
