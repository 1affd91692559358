#include "argmerge/dfquad.hpp"

#include <cmath>
#include <string>

namespace argmerge {

namespace {

void require_unit(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw DomainError(std::string(what) + " outside [0,1]: " + std::to_string(v));
    }
}

} // namespace

double f_aggregate(std::span<const double> values) {
    if (values.empty()) {
        return 0.0;
    }
    double product = 1.0;
    for (double w : values) {
        require_unit(w, "F argument");
        product *= std::fabs(1.0 - w);
    }
    return 1.0 - product;
}

double c_combine(double v0, double va, double vs) {
    require_unit(v0, "base score");
    require_unit(va, "attack aggregate");
    require_unit(vs, "support aggregate");
    if (va == vs) {
        return v0;
    }
    if (va > vs) {
        return v0 - v0 * std::fabs(vs - va);
    }
    return v0 + (1.0 - v0) * std::fabs(vs - va);
}

StrengthMap::StrengthMap(const TreeQbaf& q, std::vector<double> strengths)
    : arguments_(q.qbaf().arguments().begin(), q.qbaf().arguments().end()),
      strengths_(std::move(strengths)) {}

double StrengthMap::at(const ArgumentId& id) const {
    for (std::size_t i = 0; i < arguments_.size(); ++i) {
        if (arguments_[i].id == id) {
            return strengths_[i];
        }
    }
    throw UnknownArgument(id.str());
}

StrengthMap evaluate_strengths(const TreeQbaf& q) {
    std::vector<double> sigma(q.size(), 0.0);
    std::vector<double> attack_values;
    std::vector<double> support_values;

    const auto& layers = q.layers();
    for (auto layer = layers.rbegin(); layer != layers.rend(); ++layer) {
        for (std::size_t v : *layer) {
            attack_values.clear();
            support_values.clear();
            for (std::size_t a : q.attackers(v)) {
                attack_values.push_back(sigma[a]);
            }
            for (std::size_t s : q.supporters(v)) {
                support_values.push_back(sigma[s]);
            }
            sigma[v] = c_combine(q.qbaf().base_score(v), f_aggregate(attack_values),
                                 f_aggregate(support_values));
        }
    }
    return StrengthMap(q, std::move(sigma));
}

Verdict verdict(const StrengthMap& strengths, const ArgumentId& claim, double threshold) {
    const double s = strengths.at(claim);
    return Verdict{s >= threshold ? Verdict::Outcome::Accepted : Verdict::Outcome::Rejected, s};
}

} // namespace argmerge
