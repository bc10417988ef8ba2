#pragma once

#include <functional>
#include <string>
#include <vector>

#include "equilibra/errors.hpp"

namespace equilibra {

enum class LawKind { QuasiHomogeneous, Newtonian, PaperClassical, Custom };

struct AdmissibilityOptions {
    double delta = 1e-3;        // left end of the finiteness grid
    double x_max = 1e3;         // right end of the finiteness grid
    int grid_size = 200;        // log-spaced sample count on [delta, x_max]
    double div_x = 1e-8;        // where the divergence threshold is enforced
    double div_factor = 1e6;    // |f(div_x)| must exceed div_factor * max(1, |f(1)|)
};

struct AdmissibilityCondition {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCondition> conditions;
    int observed_limit_sign = 0;      // sign of f near 0 (+1, -1, 0 = no divergence)
    bool empirical_compactness = false;
    AdmissibilityOptions options;

    bool pass() const;
    /// Throws AdmissibilityFailure naming the first violated condition.
    void require() const;
};

/// Interaction kernel f of the pairwise force m_j (q_j - q_i) f(|q_j - q_i|).
/// Built-in kinds are two-power laws f(x) = a x^-alpha + b x^-beta; Custom
/// supplies f and f' directly (both must be side-effect-free).
class ForceLaw {
public:
    using Fn = std::function<double(double)>;

    /// f(x) = a x^-alpha + b x^-beta with alpha, beta > 0.
    static ForceLaw quasi_homogeneous(double a, double alpha, double b, double beta);
    /// f(x) = x^-3, the inverse-cube kernel of Newtonian acceleration.
    static ForceLaw newtonian();
    /// f(x) = x^-3/2.
    static ForceLaw paper_classical();
    /// Arbitrary kernel; limit_sign_hint/compactness_hint are declarations
    /// that admissibility_check verifies empirically.
    static ForceLaw custom(std::string name, Fn f, Fn fprime, int limit_sign_hint = +1,
                           bool compactness_hint = false);

    LawKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double a() const { return a_; }
    double alpha() const { return alpha_; }
    double b() const { return b_; }
    double beta() const { return beta_; }

    /// Sign of f(x) as x -> 0+ (declared for Custom, derived otherwise).
    int limit_sign() const { return limit_sign_; }
    /// True iff x f(x) -> +/-inf as x -> 0+ (the boundedness-certificate gate).
    bool compactness_flag() const { return compactness_flag_; }
    /// Dominant small-x exponent gamma (f ~ c x^-gamma); NaN for Custom.
    double dominant_exponent() const { return dominant_exponent_; }

    double eval(double x) const;
    /// x f'(x).
    double eval_xfprime(double x) const;

private:
    ForceLaw() = default;

    LawKind kind_ = LawKind::Newtonian;
    std::string name_;
    double a_ = 0, alpha_ = 0, b_ = 0, beta_ = 0;
    Fn f_, fprime_;
    int limit_sign_ = +1;
    bool compactness_flag_ = false;
    double dominant_exponent_ = 0;
};

double eval(const ForceLaw& law, double x);
double eval_xfprime(const ForceLaw& law, double x);

/// Samples f and x f' on a log grid over [delta, x_max] (finiteness), probes
/// f on a geometric sequence decreasing to div_x (signed monotone divergence)
/// and x f(x) on the same sequence (empirical compactness flag). The report
/// lists pass/fail per condition and never throws; call report.require() to
/// turn a failure into AdmissibilityFailure.
AdmissibilityReport admissibility_check(const ForceLaw& law, double delta, double x_max,
                                        int grid_size);
AdmissibilityReport admissibility_check(const ForceLaw& law,
                                        const AdmissibilityOptions& options = {});

}  // namespace equilibra
