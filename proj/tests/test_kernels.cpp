#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "msgp/kernels.hpp"

using namespace msgp;
using testutil::brute_correlation;
using testutil::random_scaled_design;

TEST_CASE("bohman correlation values") {
    CHECK(corr_bohman(0.0, 1.0) == doctest::Approx(1.0));
    // (1 - 1/2) cos(pi/2) + sin(pi/2)/pi = 1/pi
    CHECK(corr_bohman(0.5, 1.0) == doctest::Approx(0.31830988618379075).epsilon(1e-14));
    CHECK(corr_bohman(1.0, 1.0) == 0.0);
    CHECK(corr_bohman(3.7, 1.0) == 0.0);
    CHECK(corr_bohman(1.0, 2.0) == doctest::Approx(0.31830988618379075).epsilon(1e-14));
    CHECK_THROWS(corr_bohman(0.5, 0.0));
    CHECK_THROWS(corr_bohman(-0.1, 1.0));
}

TEST_CASE("truncated power correlation and validity bound") {
    // (1 - 0.25^{3/2})^2
    CHECK(corr_trunc_power(0.25, 1.0, 1.5, 2.0) == doctest::Approx(0.765625).epsilon(1e-14));
    CHECK(corr_trunc_power(1.0, 1.0, 1.5, 2.0) == 0.0);
    CHECK(trunc_power_nu_bound(1.0) == 2.0);
    CHECK(trunc_power_nu_bound(1.5) == 2.0);
    CHECK(trunc_power_nu_bound(5.0 / 3.0) == doctest::Approx(3.0));
    CHECK_THROWS(trunc_power_nu_bound(1.99));
    CHECK_THROWS(corr_trunc_power(0.25, 1.0, 5.0 / 3.0, 2.5));  // nu below the bound
}

TEST_CASE("matern 5/2 and wendland taper") {
    CHECK(corr_matern52(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(corr_matern52(0.3, 2.0) == doctest::Approx(0.768993109251618).epsilon(1e-12));
    CHECK(wendland_normalized(0.0, 2, 1) == doctest::Approx(1.0));
    CHECK(wendland_normalized(0.3, 2, 1) == doctest::Approx(0.5411854).epsilon(1e-9));
    CHECK(wendland_normalized(1.0, 2, 1) == 0.0);
    CHECK(corr_matern_wendland(0.3, 2.0, 1.0, 2, 1) ==
          doctest::Approx(0.41616784342758045).epsilon(1e-12));
    CHECK(corr_matern_wendland(1.0, 2.0, 1.0, 2, 1) == 0.0);  // compact support from the taper
}

TEST_CASE("power exponential reference kernel") {
    Eigen::VectorXd x(3), y(3), phi = Eigen::VectorXd::Ones(3);
    x << 0, 0, 0;
    y << 1, 1, 1;
    CHECK(corr_power_exponential(x, y, phi) == doctest::Approx(0.049787068367863944).epsilon(1e-14));
    CHECK(corr_power_exponential(x, x, phi) == doctest::Approx(1.0));
}

TEST_CASE("cutoff calibration on a known distance set") {
    // three 1-d points at 0, 1, 2: pair L1 distances {1, 1, 2}
    DesignMatrix d;
    d.values.resize(3, 1);
    d.values << 0.0, 1.0, 2.0;
    d.specs.push_back(VariableSpec::continuous("x", -1.0, 1.0));
    d.scaled = true;
    // a third of all pairs must be beyond the cut-off -> c = 2
    CHECK(calibrate_cutoff(d, 1.0 / 3.0) == doctest::Approx(2.0));
    // literal quantile reading picks the omega-quantile instead
    CHECK(calibrate_cutoff(d, 1.0 / 3.0, true) == doctest::Approx(1.0));
    CHECK_THROWS(calibrate_cutoff(d, 0.0));
    CHECK_THROWS(calibrate_cutoff(d, 1.0));
}

TEST_CASE("cutoff vector") {
    CutoffVector cv = CutoffVector::centered(1.2, 3, 0.9);
    CHECK(cv.tau.size() == 3);
    CHECK(cv.tau(0) == doctest::Approx(0.3));
    CHECK_NOTHROW(cv.validate());
    cv.tau(0) = 2.0;
    CHECK_THROWS(cv.validate());
    cv.tau(0) = -0.1;
    CHECK_THROWS(cv.validate());
}

TEST_CASE("sparse assembly equals dense brute force") {
    for (KernelFamily family :
         {KernelFamily::Bohman, KernelFamily::TruncatedPower, KernelFamily::MaternWendland}) {
        DesignMatrix d = random_scaled_design(60, 3, 123 + static_cast<int>(family));
        KernelSpec spec;
        spec.family = family;
        spec.alpha = 1.5;
        spec.nu = 2.0;
        spec.nugget = 1e-8;
        CutoffVector tau = CutoffVector::centered(calibrate_cutoff(d, 0.5), d.p(), 0.5);
        SparseCorrelation sparse = assemble_sparse_correlation(d, spec, tau);
        Eigen::MatrixXd dense = brute_correlation(d, spec, tau);
        CHECK((sparse.dense() - dense).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("structural sparsity meets the target fraction") {
    DesignMatrix d = random_scaled_design(200, 4, 77);
    KernelSpec spec;  // bohman, omega 0.9
    CutoffVector tau = CutoffVector::centered(calibrate_cutoff(d, spec.omega), d.p(), spec.omega);
    SparseCorrelation r = assemble_sparse_correlation(d, spec, tau);
    const double n = static_cast<double>(r.n);
    const double off_nonzero = static_cast<double>(r.stored_nonzeros()) - n;  // lower triangle
    const double off_total = n * (n - 1.0) / 2.0;
    CHECK(1.0 - off_nonzero / off_total >= spec.omega);
}

TEST_CASE("cross correlation matches the product kernel") {
    DesignMatrix train = random_scaled_design(40, 2, 5);
    DesignMatrix test = random_scaled_design(15, 2, 6);
    KernelSpec spec;
    CutoffVector tau = CutoffVector::centered(calibrate_cutoff(train, 0.5), 2, 0.5);
    Eigen::MatrixXd r = Eigen::MatrixXd(cross_correlation(train, test, spec, tau));
    REQUIRE(r.rows() == 40);
    REQUIRE(r.cols() == 15);
    for (Eigen::Index i = 0; i < 40; ++i)
        for (Eigen::Index j = 0; j < 15; ++j) {
            double v = 1.0;
            for (Eigen::Index k = 0; k < 2; ++k)
                v *= corr_bohman(std::abs(train.values(i, k) - test.values(j, k)),
                                 tau.tau(k));
            CHECK(r(i, j) == doctest::Approx(v).epsilon(1e-14));
        }
}

TEST_CASE("kernel spec validation") {
    KernelSpec spec;
    spec.omega = 1.0;
    CHECK_THROWS(spec.validate());
    spec.omega = 0.9;
    spec.nugget = -1.0;
    CHECK_THROWS(spec.validate());
    spec.nugget = 0.0;
    spec.family = KernelFamily::TruncatedPower;
    spec.alpha = 5.0 / 3.0;
    spec.nu = 2.0;
    CHECK_THROWS(spec.validate());
    spec.nu = 3.0;
    CHECK_NOTHROW(spec.validate());
    CHECK(kernel_family_from_string(to_string(KernelFamily::MaternWendland)) ==
          KernelFamily::MaternWendland);
    CHECK_THROWS(kernel_family_from_string("gauss"));
}
