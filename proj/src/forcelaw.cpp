#include "equilibra/forcelaw.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace equilibra {

namespace {

void check_positive_x(double x) {
    if (!(x > 0)) {
        std::ostringstream os;
        os << "force law evaluated at x = " << x << " (requires x > 0)";
        throw NonPositiveDistance(os.str());
    }
}

int sign_of(double v) { return v > 0 ? +1 : (v < 0 ? -1 : 0); }

}  // namespace

ForceLaw ForceLaw::quasi_homogeneous(double a, double alpha, double b, double beta) {
    if (!(alpha > 0) || !(beta > 0))
        throw ConfigError("quasi-homogeneous exponents must be positive");
    ForceLaw law;
    law.kind_ = LawKind::QuasiHomogeneous;
    law.name_ = "quasi_homogeneous";
    law.a_ = a;
    law.alpha_ = alpha;
    law.b_ = b;
    law.beta_ = beta;
    // Small-x behaviour is governed by the larger exponent (its coefficient
    // dominating), falling back to the other term if that coefficient is zero.
    double g_hi = std::max(alpha, beta);
    double g_lo = std::min(alpha, beta);
    double c_hi = (alpha >= beta) ? a : b;
    double c_lo = (alpha >= beta) ? b : a;
    double gamma = (c_hi != 0) ? g_hi : g_lo;
    double coeff = (c_hi != 0) ? c_hi : c_lo;
    law.dominant_exponent_ = (coeff != 0) ? gamma : 0;
    law.limit_sign_ = sign_of(coeff);
    law.compactness_flag_ = (coeff != 0) && (gamma > 1);
    return law;
}

ForceLaw ForceLaw::newtonian() {
    ForceLaw law = quasi_homogeneous(1.0, 3.0, 0.0, 1.0);
    law.kind_ = LawKind::Newtonian;
    law.name_ = "newtonian";
    return law;
}

ForceLaw ForceLaw::paper_classical() {
    ForceLaw law = quasi_homogeneous(1.0, 1.5, 0.0, 1.0);
    law.kind_ = LawKind::PaperClassical;
    law.name_ = "inverse_three_halves";
    return law;
}

ForceLaw ForceLaw::custom(std::string name, Fn f, Fn fprime, int limit_sign_hint,
                          bool compactness_hint) {
    if (!f || !fprime) throw ConfigError("custom force law needs both f and f'");
    ForceLaw law;
    law.kind_ = LawKind::Custom;
    law.name_ = std::move(name);
    law.f_ = std::move(f);
    law.fprime_ = std::move(fprime);
    law.limit_sign_ = limit_sign_hint;
    law.compactness_flag_ = compactness_hint;
    law.dominant_exponent_ = std::numeric_limits<double>::quiet_NaN();
    return law;
}

double ForceLaw::eval(double x) const {
    check_positive_x(x);
    if (kind_ == LawKind::Custom) return f_(x);
    return a_ * std::pow(x, -alpha_) + b_ * std::pow(x, -beta_);
}

double ForceLaw::eval_xfprime(double x) const {
    check_positive_x(x);
    if (kind_ == LawKind::Custom) return x * fprime_(x);
    return -a_ * alpha_ * std::pow(x, -alpha_) - b_ * beta_ * std::pow(x, -beta_);
}

double eval(const ForceLaw& law, double x) { return law.eval(x); }
double eval_xfprime(const ForceLaw& law, double x) { return law.eval_xfprime(x); }

bool AdmissibilityReport::pass() const {
    for (const auto& c : conditions)
        if (!c.pass) return false;
    return true;
}

void AdmissibilityReport::require() const {
    for (const auto& c : conditions) {
        if (!c.pass)
            throw AdmissibilityFailure("condition '" + c.name + "' failed: " + c.detail);
    }
}

AdmissibilityReport admissibility_check(const ForceLaw& law, double delta, double x_max,
                                        int grid_size) {
    AdmissibilityOptions opt;
    opt.delta = delta;
    opt.x_max = x_max;
    opt.grid_size = grid_size;
    return admissibility_check(law, opt);
}

AdmissibilityReport admissibility_check(const ForceLaw& law,
                                        const AdmissibilityOptions& opt) {
    if (!(opt.delta > 0) || !(opt.x_max > opt.delta) || opt.grid_size < 2)
        throw ConfigError("admissibility grid requires 0 < delta < x_max and >= 2 points");

    AdmissibilityReport rep;
    rep.options = opt;

    // Condition 1: f and x f' finite on a log grid over [delta, x_max].
    {
        AdmissibilityCondition c;
        c.name = "finite_on_grid";
        c.pass = true;
        double lo = std::log(opt.delta), hi = std::log(opt.x_max);
        for (int i = 0; i < opt.grid_size; ++i) {
            double x = std::exp(lo + (hi - lo) * i / (opt.grid_size - 1));
            double f = law.eval(x);
            double xfp = law.eval_xfprime(x);
            if (!std::isfinite(f) || !std::isfinite(xfp)) {
                c.pass = false;
                std::ostringstream os;
                os << "non-finite value at x = " << x << " (f = " << f
                   << ", x f' = " << xfp << ")";
                c.detail = os.str();
                break;
            }
        }
        if (c.pass) c.detail = "f and x f' finite on the sample grid";
        rep.conditions.push_back(c);
    }

    // Conditions 2+3: |f| grows monotonically along a geometric sequence
    // x_m -> div_x with a single sign throughout, and clears the divergence
    // threshold at div_x. A sign flip or shrinking magnitude fails the
    // monotone-divergence condition; a sign of 0 at div_x fails the threshold.
    {
        AdmissibilityCondition mono;
        mono.name = "signed_monotone_divergence";
        mono.pass = true;
        AdmissibilityCondition thresh;
        thresh.name = "divergence_threshold";

        std::vector<double> xs;
        for (double x = std::min(opt.delta, 1e-2); x > opt.div_x * (1 + 1e-12); x *= 0.5)
            xs.push_back(x);
        xs.push_back(opt.div_x);

        double prev_abs = 0;
        int sign0 = 0;
        for (double x : xs) {
            double f = law.eval(x);
            if (!std::isfinite(f)) {
                mono.pass = false;
                std::ostringstream os;
                os << "f non-finite at x = " << x;
                mono.detail = os.str();
                break;
            }
            int s = sign_of(f);
            if (sign0 == 0) sign0 = s;
            if (s != sign0 || std::abs(f) < prev_abs) {
                mono.pass = false;
                std::ostringstream os;
                os << "|f| not monotonically divergent with fixed sign near 0 (x = " << x
                   << ", f = " << f << ")";
                mono.detail = os.str();
                break;
            }
            prev_abs = std::abs(f);
        }
        if (mono.pass) mono.detail = "f diverges monotonically with fixed sign toward 0";
        rep.observed_limit_sign = sign0;

        double f_div = law.eval(opt.div_x);
        double f_one = law.eval(1.0);
        double need = opt.div_factor * std::max(1.0, std::abs(f_one));
        thresh.pass = std::isfinite(f_div) && std::abs(f_div) >= need;
        {
            std::ostringstream os;
            os << "|f(" << opt.div_x << ")| = " << std::abs(f_div) << " vs required "
               << need;
            thresh.detail = os.str();
        }

        rep.conditions.push_back(mono);
        rep.conditions.push_back(thresh);
    }

    // Condition 4: declared limit sign matches the observed one.
    {
        AdmissibilityCondition c;
        c.name = "limit_sign_consistent";
        c.pass = (rep.observed_limit_sign == law.limit_sign());
        std::ostringstream os;
        os << "declared " << law.limit_sign() << ", observed " << rep.observed_limit_sign;
        c.detail = os.str();
        rep.conditions.push_back(c);
    }

    // Empirical compactness: does x f(x) blow up toward 0? Not a pass/fail
    // condition by itself, but a declared flag must match the observation.
    {
        double x_small = opt.div_x;
        double xf_small = x_small * law.eval(x_small);
        double xf_ref = std::abs(law.eval(1.0));
        rep.empirical_compactness =
            std::isfinite(xf_small) && std::abs(xf_small) > 1e3 * std::max(1.0, xf_ref);

        AdmissibilityCondition c;
        c.name = "compactness_flag_consistent";
        c.pass = (rep.empirical_compactness == law.compactness_flag());
        std::ostringstream os;
        os << "declared " << (law.compactness_flag() ? "true" : "false") << ", observed "
           << (rep.empirical_compactness ? "true" : "false") << " (x f at " << x_small
           << " is " << xf_small << ")";
        c.detail = os.str();
        rep.conditions.push_back(c);
    }

    return rep;
}

}  // namespace equilibra
