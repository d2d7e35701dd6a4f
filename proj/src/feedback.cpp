#include "cmv/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmv {

FeedbackFn FeedbackFn::linear() { return FeedbackFn(Kind::linear); }

FeedbackFn FeedbackFn::neglog() { return FeedbackFn(Kind::neglog); }

FeedbackFn FeedbackFn::table(std::vector<double> xs, std::vector<double> fs) {
    if (xs.size() < 2 || xs.size() != fs.size())
        throw std::invalid_argument("feedback table: need >= 2 samples with matching lengths");
    if (xs.front() != 0.0 || xs.back() != 1.0)
        throw std::invalid_argument("feedback table: samples must span [0,1]");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("feedback table: x must be strictly increasing");
    for (double v : fs)
        if (!std::isfinite(v)) throw std::invalid_argument("feedback table: non-finite value");
    if (fs.front() != 0.0) throw std::invalid_argument("feedback table: f(0) must be 0");
    FeedbackFn f(Kind::table);
    f.xs_ = std::move(xs);
    f.fs_ = std::move(fs);
    return f;
}

std::string FeedbackFn::name() const {
    switch (kind_) {
        case Kind::linear: return "linear";
        case Kind::neglog: return "neglog";
        case Kind::table: return "table";
    }
    return "unknown";
}

double FeedbackFn::eval_unchecked(double x) const {
    switch (kind_) {
        case Kind::linear: return x;
        case Kind::neglog: return x >= 1.0 ? std::numeric_limits<double>::infinity() : -std::log1p(-x);
        case Kind::table: {
            if (x <= 0.0) return fs_.front();
            if (x >= 1.0) return fs_.back();
            const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
            const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
            const double w = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
            return fs_[i] + w * (fs_[i + 1] - fs_[i]);
        }
    }
    return 0.0;
}

double FeedbackFn::operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("feedback: argument outside [0,1]");
    if (kind_ == Kind::neglog && x >= 1.0) throw std::domain_error("feedback: neglog undefined at 1");
    return eval_unchecked(x);
}

double FeedbackFn::lipschitz(double x) const {
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("lipschitz: argument outside [0,1)");
    switch (kind_) {
        case Kind::linear: return 1.0;
        case Kind::neglog: return 1.0 / (1.0 - x);
        case Kind::table: {
            double lip = 0.0;
            for (std::size_t i = 0; i + 1 < xs_.size() && xs_[i] <= x; ++i)
                lip = std::max(lip, std::abs((fs_[i + 1] - fs_[i]) / (xs_[i + 1] - xs_[i])));
            return lip;
        }
    }
    return 0.0;
}

bool FeedbackFn::nondecreasing() const {
    if (kind_ != Kind::table) return true;
    for (std::size_t i = 1; i < fs_.size(); ++i)
        if (fs_[i] < fs_[i - 1]) return false;
    return true;
}

double FeedbackFn::inverse(double y) const {
    switch (kind_) {
        case Kind::linear: return std::clamp(y, 0.0, 1.0);
        case Kind::neglog: return y <= 0.0 ? 0.0 : -std::expm1(-y);
        case Kind::table: {
            if (y <= fs_.front()) return 0.0;
            if (y > fs_.back()) return 1.0;
            const auto it = std::lower_bound(fs_.begin(), fs_.end(), y);
            const std::size_t i = static_cast<std::size_t>(it - fs_.begin());  // fs_[i-1] < y <= fs_[i]
            const double w = (y - fs_[i - 1]) / (fs_[i] - fs_[i - 1]);
            return std::clamp(xs_[i - 1] + w * (xs_[i] - xs_[i - 1]), xs_[i - 1], xs_[i]);
        }
    }
    return 0.0;
}

std::vector<double> FeedbackFn::knots() const {
    if (kind_ != Kind::table) return {};
    return {xs_.begin() + 1, xs_.end() - 1};
}

double eval_feedback(const FeedbackFn& f, double x) { return f(x); }

double lipschitz_constant(const FeedbackFn& f, double x) { return f.lipschitz(x); }

}  // namespace cmv
