#include "kitecert/validation.hpp"

#include <algorithm>
#include <cmath>

namespace kitecert {

IndicatorVector::IndicatorVector(std::vector<double> vals, std::string controller)
    : values_(std::move(vals)), controller_id_(std::move(controller)) {
    if (values_.empty())
        throw std::invalid_argument("IndicatorVector: needs at least one value");
    for (double v : values_)
        if (std::isnan(v))
            throw std::invalid_argument("IndicatorVector: NaN indicator value");
}

void RiskSpec::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("RiskSpec: epsilon must be in (0,1)");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("RiskSpec: delta must be in (0,1)");
    if (r < 1) throw std::invalid_argument("RiskSpec: r must be >= 1");
    if (m < 1) throw std::invalid_argument("RiskSpec: m must be >= 1");
}

double generalized_max(std::span<const double> v, int r) {
    const int n = static_cast<int>(v.size());
    if (r < 1 || r > n)
        throw std::invalid_argument("generalized_max: r out of range [1, N]");
    std::vector<double> sorted(v.begin(), v.end());
    std::nth_element(sorted.begin(), sorted.begin() + (r - 1), sorted.end(),
                     std::greater<double>());
    return sorted[r - 1];
}

double generalized_max(const IndicatorVector& v, int r) {
    return generalized_max(std::span<const double>(v.values()), r);
}

double binomial_tail(int n, double epsilon, int k) {
    if (n < 1) throw std::invalid_argument("binomial_tail: n must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("binomial_tail: epsilon must be in (0,1)");
    if (k < 0 || k > n)
        throw std::invalid_argument("binomial_tail: k must be in [0, n]");
    if (k == n) return 1.0;

    const double log_eps = std::log(epsilon);
    const double log_1meps = std::log1p(-epsilon);
    const double lgn = std::lgamma(n + 1.0);

    // Kahan-compensated sum of exp(log term).
    double sum = 0.0, comp = 0.0;
    for (int z = 0; z <= k; ++z) {
        const double log_term = lgn - std::lgamma(z + 1.0) - std::lgamma(n - z + 1.0) +
                                z * log_eps + (n - z) * log_1meps;
        const double term = std::exp(log_term);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return std::clamp(sum, 0.0, 1.0);
}

int min_samples(const RiskSpec& risk) {
    risk.validate();
    const double ln_md = std::log(static_cast<double>(risk.m) / risk.delta);
    const double rm1 = static_cast<double>(risk.r - 1);
    const double bound = (rm1 + ln_md + std::sqrt(2.0 * rm1 * ln_md)) / risk.epsilon;
    int n = static_cast<int>(std::ceil(bound));
    n = std::max(n, risk.r);
    // The bound is sufficient in exact arithmetic; guard against rounding at
    // the ceiling edge.
    while (binomial_tail(n, risk.epsilon, risk.r - 1) > risk.delta / risk.m) ++n;
    return n;
}

int exact_min_samples(const RiskSpec& risk) {
    risk.validate();
    const double target = risk.delta / risk.m;
    int lo = risk.r;
    int hi = min_samples(risk);
    if (binomial_tail(lo, risk.epsilon, risk.r - 1) <= target) return lo;
    // tail(hi) <= target by construction; bisect on the monotone tail.
    while (lo + 1 < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (binomial_tail(mid, risk.epsilon, risk.r - 1) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

Certificate certify_family(const std::vector<IndicatorVector>& vectors,
                           const RiskSpec& risk, double threshold) {
    risk.validate();
    if (static_cast<int>(vectors.size()) != risk.m)
        throw CertificationError("certify_family: family size does not match RiskSpec.m");
    const std::size_t n = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != n)
            throw CertificationError("certify_family: indicator vectors have mismatched lengths");
    const int required = exact_min_samples(risk);
    if (static_cast<int>(n) < required)
        throw CertificationError("certify_family: N = " + std::to_string(n) +
                                 " below required minimum " + std::to_string(required));
    if (risk.r > static_cast<int>(n))
        throw CertificationError("certify_family: r exceeds N");

    Certificate cert;
    cert.risk = risk;
    cert.n_used = static_cast<int>(n);
    cert.threshold = threshold;
    cert.levels.reserve(vectors.size());
    cert.safe.reserve(vectors.size());
    for (const auto& v : vectors) {
        const double level = generalized_max(v, risk.r);
        cert.levels.push_back(level);
        cert.safe.push_back(level <= threshold);
        cert.controller_ids.push_back(v.controller_id());
    }
    return cert;
}

}  // namespace kitecert
