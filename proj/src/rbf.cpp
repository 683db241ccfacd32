#include "dfk/rbf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfk {
namespace detail {

double RadialFn::operator()(double r) const {
    double v = 0.0;
    for (size_t i = num.size(); i-- > 0;) v = v * r + num[i];
    if (rpow > 0) {
        // num[0] != 0 here by construction (div_r shifts exact zeros away),
        // so r == 0 correctly yields +/-infinity for genuinely singular
        // coefficients (only Wen2's b family).
        for (int k = 0; k < rpow; ++k) v /= r;
    }
    if (gauss) v *= std::exp(-4.5 * r * r);
    return v;
}

RadialFn RadialFn::derive() const {
    // d/dr [ n(r) / r^k * G(r) ] with G = exp(-9 r^2/2), G' = -9 r G:
    //   [ (n' - 9 r n [gauss]) r - k n ] / r^(k+1) * G
    std::vector<double> np(num.size() > 1 ? num.size() - 1 : 0, 0.0);
    for (size_t i = 1; i < num.size(); ++i) np[i - 1] = static_cast<double>(i) * num[i];

    std::vector<double> m = np;
    if (gauss) {
        m.resize(std::max(m.size(), num.size() + 1), 0.0);
        for (size_t i = 0; i < num.size(); ++i) m[i + 1] -= 9.0 * num[i];
    }

    RadialFn out;
    out.gauss = gauss;
    if (rpow == 0) {
        out.num = std::move(m);
        out.rpow = 0;
    } else {
        out.num.assign(std::max(m.size() + 1, num.size()), 0.0);
        for (size_t i = 0; i < m.size(); ++i) out.num[i + 1] += m[i];
        for (size_t i = 0; i < num.size(); ++i) out.num[i] -= static_cast<double>(rpow) * num[i];
        out.rpow = rpow + 1;
    }
    while (out.rpow > 0 && !out.num.empty() && out.num[0] == 0.0) {
        out.num.erase(out.num.begin());
        --out.rpow;
    }
    while (!out.num.empty() && out.num.back() == 0.0) out.num.pop_back();
    if (out.num.empty()) out.num.push_back(0.0);
    return out;
}

RadialFn RadialFn::div_r() const {
    RadialFn out = *this;
    if (!out.num.empty() && out.num[0] == 0.0)
        out.num.erase(out.num.begin());
    else
        ++out.rpow;
    if (out.num.empty()) out.num.push_back(0.0);
    return out;
}

RadialFn RadialFn::operator-(const RadialFn& o) const {
    // Only used on same-representation operands (rpow/gauss agree).
    RadialFn out = *this;
    out.num.resize(std::max(num.size(), o.num.size()), 0.0);
    for (size_t i = 0; i < o.num.size(); ++i) out.num[i] -= o.num[i];
    while (out.num.size() > 1 && out.num.back() == 0.0) out.num.pop_back();
    return out;
}

RadialFn RadialFn::operator-() const {
    RadialFn out = *this;
    for (double& c : out.num) c = -c;
    return out;
}

namespace {

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

std::vector<double> poly_pow(const std::vector<double>& a, int n) {
    std::vector<double> c{1.0};
    for (int i = 0; i < n; ++i) c = poly_mul(c, a);
    return c;
}

ProfileTable make_table(ScalarRbf family) {
    ProfileTable t;
    RadialFn p0;
    switch (family) {
        case ScalarRbf::Wen4:  // (1-r)^6 (35 r^2 + 18 r + 3)
            p0.num = poly_mul(poly_pow({1.0, -1.0}, 6), {3.0, 18.0, 35.0});
            break;
        case ScalarRbf::Wen2:  // (1-r)^4 (4 r + 1)
            p0.num = poly_mul(poly_pow({1.0, -1.0}, 4), {1.0, 4.0});
            break;
        case ScalarRbf::Poly6:  // (1 - r^2)^3
            p0.num = poly_pow({1.0, 0.0, -1.0}, 3);
            break;
        case ScalarRbf::Gauss:  // exp(-9 r^2 / 2)
            p0.num = {1.0};
            p0.gauss = true;
            t.compact = false;
            break;
    }
    t.p0 = p0;
    t.p1 = t.p0.derive();
    t.p2 = t.p1.derive();
    t.p3 = t.p2.derive();
    t.a = t.p1.div_r();
    t.b = (t.p2 - t.a).div_r().div_r();
    t.db = t.b.derive();
    t.ddb = t.db.derive();
    t.d3r = t.p3.div_r();
    t.d3rp = t.d3r.derive();
    return t;
}

}  // namespace

const ProfileTable& profile(ScalarRbf family) {
    static const ProfileTable wen4 = make_table(ScalarRbf::Wen4);
    static const ProfileTable wen2 = make_table(ScalarRbf::Wen2);
    static const ProfileTable poly6 = make_table(ScalarRbf::Poly6);
    static const ProfileTable gauss = make_table(ScalarRbf::Gauss);
    switch (family) {
        case ScalarRbf::Wen4: return wen4;
        case ScalarRbf::Wen2: return wen2;
        case ScalarRbf::Poly6: return poly6;
        default: return gauss;
    }
}

}  // namespace detail

bool compact_support(ScalarRbf family) { return family != ScalarRbf::Gauss; }

const char* family_name(ScalarRbf family) {
    switch (family) {
        case ScalarRbf::Wen4: return "wen4";
        case ScalarRbf::Wen2: return "wen2";
        case ScalarRbf::Poly6: return "poly6";
        default: return "gauss";
    }
}

double eval_radial(ScalarRbf family, double r, int order) {
    if (order < 0 || order > 2) throw std::invalid_argument("eval_radial: order must be 0, 1, or 2");
    if (r < 0.0) throw std::invalid_argument("eval_radial: r must be nonnegative");
    const auto& t = detail::profile(family);
    if (t.compact && r >= 1.0) return 0.0;
    switch (order) {
        case 0: return t.p0(r);
        case 1: return t.p1(r);
        default: return t.p2(r);
    }
}

OperatorCoeffs radial_operator_coeffs(ScalarRbf family, double r, int d) {
    if (r < 0.0) throw std::invalid_argument("radial_operator_coeffs: r must be nonnegative");
    const auto& t = detail::profile(family);
    if (t.compact && r >= 1.0) return {0.0, 0.0, 0.0};
    const double a = t.a(r);
    const double b = t.b(r);
    const double neglap = -(t.p2(r) + static_cast<double>(d - 1) * a);
    return {neglap, a, b};
}

}  // namespace dfk
