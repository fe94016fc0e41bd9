#pragma once

/**
 * @file polyalg.hpp
 * @brief Integer polynomials with zero constant term.
 *
 * Coefficients are arbitrary precision (boost cpp_int). All operations are
 * pure functions of their arguments.
 */

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace ergomax {

using Int = boost::multiprecision::cpp_int;

inline Int abs_int(const Int& a) { return a < 0 ? Int(-a) : a; }

inline Int gcd_int(Int a, Int b)
{
    a = abs_int(a);
    b = abs_int(b);
    while (b != 0) {
        Int t = a % b;
        a = std::move(b);
        b = std::move(t);
    }
    return a;
}

inline Int lcm_int(const Int& a, const Int& b)
{
    if (a == 0 || b == 0) return 0;
    return abs_int(a / gcd_int(a, b) * b);
}

/** Non-negative residue of a modulo m (m > 0). */
inline std::int64_t mod_int(const Int& a, std::int64_t m)
{
    Int r = a % m;
    if (r < 0) r += m;
    return static_cast<std::int64_t>(r);
}

/** p(n) = c_1 n + c_2 n^2 + ... + c_D n^D. */
class IntPoly {
public:
    IntPoly() = default;

    /** coeffs[k] is the coefficient of n^(k+1). */
    explicit IntPoly(std::vector<Int> coeffs) : c_(std::move(coeffs)) { trim(); }

    IntPoly(std::initializer_list<long long> coeffs)
    {
        for (long long v : coeffs) c_.emplace_back(v);
        trim();
    }

    static IntPoly monomial(int degree, Int coeff = 1)
    {
        std::vector<Int> c(static_cast<std::size_t>(degree));
        if (degree >= 1) c.back() = std::move(coeff);
        return IntPoly(std::move(c));
    }

    int degree() const { return static_cast<int>(c_.size()); }
    bool is_zero() const { return c_.empty(); }

    /** Coefficient of n^k; zero outside 1..degree. */
    Int coeff(int k) const
    {
        if (k < 1 || k > degree()) return 0;
        return c_[static_cast<std::size_t>(k - 1)];
    }

    Int leading() const { return c_.empty() ? Int(0) : c_.back(); }

    const std::vector<Int>& coeffs() const { return c_; }

    Int operator()(const Int& n) const
    {
        Int acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * n + *it;
        return acc * n;
    }

    /** p(n) mod m in [0, m). */
    std::int64_t eval_mod(std::int64_t n, std::int64_t m) const
    {
        if (m == 1) return 0;
        using u128 = unsigned __int128;
        const std::uint64_t mm = static_cast<std::uint64_t>(m);
        std::uint64_t x = static_cast<std::uint64_t>(((n % m) + m) % m);
        std::uint64_t acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            std::uint64_t ck = static_cast<std::uint64_t>(mod_int(*it, m));
            acc = static_cast<std::uint64_t>((static_cast<u128>(acc) * x + ck) % mm);
        }
        return static_cast<std::int64_t>((static_cast<u128>(acc) * x) % mm);
    }

    friend bool operator==(const IntPoly& a, const IntPoly& b) { return a.c_ == b.c_; }
    friend bool operator!=(const IntPoly& a, const IntPoly& b) { return !(a == b); }

    friend IntPoly operator+(const IntPoly& a, const IntPoly& b)
    {
        std::vector<Int> c(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (k < a.c_.size()) c[k] += a.c_[k];
            if (k < b.c_.size()) c[k] += b.c_[k];
        }
        return IntPoly(std::move(c));
    }

    friend IntPoly operator-(const IntPoly& a) { return a * Int(-1); }
    friend IntPoly operator-(const IntPoly& a, const IntPoly& b) { return a + (-b); }

    friend IntPoly operator*(const IntPoly& a, const Int& k)
    {
        std::vector<Int> c = a.c_;
        for (auto& v : c) v *= k;
        return IntPoly(std::move(c));
    }
    friend IntPoly operator*(const Int& k, const IntPoly& a) { return a * k; }

    /** Human form, e.g. "16n^2+12n". */
    std::string str() const
    {
        if (c_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (int k = degree(); k >= 1; --k) {
            const Int& v = c_[static_cast<std::size_t>(k - 1)];
            if (v == 0) continue;
            Int mag = abs_int(v);
            if (v < 0) os << '-';
            else if (!first) os << '+';
            if (mag != 1) os << mag;
            os << 'n';
            if (k > 1) os << '^' << k;
            first = false;
        }
        return os.str();
    }

private:
    void trim()
    {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<Int> c_;
};

inline std::ostream& operator<<(std::ostream& os, const IntPoly& p) { return os << p.str(); }

/** q(n) = p(lambda n + r) - p(r). */
inline IntPoly compose_affine(const IntPoly& p, const Int& lambda, const Int& r)
{
    // Horner on full polynomials (index = power, constant included).
    std::vector<Int> acc{0};
    auto mul_affine = [&](const std::vector<Int>& a) {
        std::vector<Int> out(a.size() + 1);
        for (std::size_t i = 0; i < a.size(); ++i) {
            out[i] += a[i] * r;
            out[i + 1] += a[i] * lambda;
        }
        return out;
    };
    for (int k = p.degree(); k >= 1; --k) {
        acc = mul_affine(acc);
        acc[0] += p.coeff(k);
    }
    acc = mul_affine(acc);
    return IntPoly(std::vector<Int>(acc.begin() + 1, acc.end()));
}

/** (num/den) p, required to have integer coefficients. */
inline IntPoly scale_exact(const IntPoly& p, const Int& num, const Int& den)
{
    if (num == 0 || den == 0) throw NonIntegralScale("num and den must be nonzero");
    std::vector<Int> c;
    c.reserve(p.coeffs().size());
    for (const Int& v : p.coeffs()) {
        Int t = v * num;
        if (t % den != 0) {
            std::ostringstream os;
            os << den << " does not divide " << num << "*(" << p.str() << ")";
            throw NonIntegralScale(os.str());
        }
        c.push_back(t / den);
    }
    return IntPoly(std::move(c));
}

/** Coprime (c_p, c_q), c_p > 0, with p/c_p = q/c_q; absent when independent. */
inline std::optional<std::pair<Int, Int>> linear_dependence(const IntPoly& p, const IntPoly& q)
{
    if (p.is_zero() || q.is_zero()) throw ZeroPolynomial("linear_dependence of a zero polynomial");
    if (p.degree() != q.degree()) return std::nullopt;
    const Int a = p.leading();
    const Int b = q.leading();
    for (int k = 1; k <= p.degree(); ++k)
        if (p.coeff(k) * b != q.coeff(k) * a) return std::nullopt;
    Int g = gcd_int(a, b);
    Int cp = a / g;
    Int cq = b / g;
    if (cp < 0) {
        cp = -cp;
        cq = -cq;
    }
    return std::make_pair(cp, cq);
}

/** Smallest lambda with (lambda/b) p integral, b the leading coefficient. */
inline Int lambda_divisor(const IntPoly& p)
{
    if (p.is_zero()) throw ZeroPolynomial("lambda_divisor of the zero polynomial");
    const Int b = abs_int(p.leading());
    Int lam = 1;
    for (const Int& c : p.coeffs()) lam = lcm_int(lam, b / gcd_int(b, c));
    return lam;
}

} // namespace ergomax
