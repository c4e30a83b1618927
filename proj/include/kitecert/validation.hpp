#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kitecert {

// Thrown when a certificate cannot be issued (mismatched indicator vectors,
// sample count below the required minimum). Distinct from invalid_argument so
// the CLI can map it to its own exit code.
class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One closed-loop indicator outcome per scenario, for a single controller.
// NaN is rejected at construction; +inf is admitted because faulted runs are
// recorded with an infinite violation sentinel and must count as violations.
struct IndicatorVector {
    IndicatorVector(std::vector<double> vals, std::string controller);

    const std::vector<double>& values() const { return values_; }
    const std::string& controller_id() const { return controller_id_; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
    std::string controller_id_;
};

// Violation probability epsilon, confidence complement delta, discarding
// parameter r and family cardinality m.
struct RiskSpec {
    double epsilon = 0.0;
    double delta = 0.0;
    int r = 1;
    int m = 1;

    void validate() const;
};

struct Certificate {
    RiskSpec risk;
    int n_used = 0;
    double threshold = 0.0;
    std::vector<double> levels;       // psi(v_i, r) per controller
    std::vector<bool> safe;           // levels[i] <= threshold
    std::vector<std::string> controller_ids;
};

// r-th largest component (duplicates counted with multiplicity). r = 1 is the
// maximum, r = size the minimum.
double generalized_max(std::span<const double> v, int r);
double generalized_max(const IndicatorVector& v, int r);

// P(Bin(n, epsilon) <= k), evaluated term-wise in the log domain with
// compensated summation. Exact 1.0 when k == n.
double binomial_tail(int n, double epsilon, int k);

// Sufficient sample count: the closed-form bound
//   N = ceil((r - 1 + ln(m/delta) + sqrt(2 (r-1) ln(m/delta))) / epsilon),
// asserted against the binomial inequality before returning.
int min_samples(const RiskSpec& risk);

// Smallest N with binomial_tail(N, epsilon, r-1) <= delta/m, by monotone
// bisection. Always <= min_samples(risk).
int exact_min_samples(const RiskSpec& risk);

// Empirical performance levels for a family of controllers evaluated on the
// same N scenarios: level_i = psi(v_i, r), safe iff level_i <= threshold.
// With confidence >= 1-delta, every controller's violation probability beyond
// its level is <= epsilon.
Certificate certify_family(const std::vector<IndicatorVector>& vectors,
                           const RiskSpec& risk, double threshold = 0.0);

}  // namespace kitecert
