#pragma once

#include <string>
#include <vector>

namespace cmv {

/// The feedback function f : [0,1] -> R with f(0) = 0.
class FeedbackFn {
public:
    enum class Kind { linear, neglog, table };

    static FeedbackFn linear();
    /// f(x) = -log(1-x), defined on [0,1).
    static FeedbackFn neglog();
    /// Linear interpolation through (xs[i], fs[i]); xs must run from 0 to 1
    /// strictly increasing and fs[0] must be 0.
    static FeedbackFn table(std::vector<double> xs, std::vector<double> fs);

    Kind kind() const { return kind_; }
    std::string name() const;
    const std::vector<double>& table_x() const { return xs_; }
    const std::vector<double>& table_f() const { return fs_; }

    /// f(x); throws std::domain_error outside [0,1] (outside [0,1) for neglog).
    double operator()(double x) const;

    /// f(x) without the domain check; neglog returns +inf for x >= 1.
    double eval_unchecked(double x) const;

    /// ||f||_Lip(x) = sup over y != z in [0,x] of |f(y)-f(z)|/|y-z|.
    double lipschitz(double x) const;

    bool nondecreasing() const;

    /// Generalised inverse inf{x in [0,1] : f(x) >= y} for nondecreasing f.
    double inverse(double y) const;

    /// Interior knots where f is not smooth (table breakpoints), empty otherwise.
    std::vector<double> knots() const;

private:
    explicit FeedbackFn(Kind k) : kind_(k) {}

    Kind kind_;
    std::vector<double> xs_;
    std::vector<double> fs_;
};

double eval_feedback(const FeedbackFn& f, double x);
double lipschitz_constant(const FeedbackFn& f, double x);

}  // namespace cmv
