#pragma once

// Truncated Taylor series in one complex variable. Coefficient k holds
// f^(k)(s0) / k!, so arithmetic is plain Cauchy-product bookkeeping.

#include <array>
#include <complex>
#include <cstddef>

namespace adiabat {

using cplx = std::complex<double>;

template <std::size_t N>
class Jet {
public:
    static constexpr std::size_t size = N;

    Jet() { c_.fill(cplx{}); }
    Jet(cplx value) { c_.fill(cplx{}); c_[0] = value; }

    static Jet variable(cplx s0)
    {
        Jet j(s0);
        if constexpr (N > 1) j.c_[1] = 1.0;
        return j;
    }

    cplx& operator[](std::size_t k) { return c_[k]; }
    const cplx& operator[](std::size_t k) const { return c_[k]; }

    cplx value() const { return c_[0]; }

    // k-th derivative at the expansion point.
    cplx derivative(std::size_t k) const
    {
        double f = 1.0;
        for (std::size_t i = 2; i <= k; ++i) f *= double(i);
        return c_[k] * f;
    }

    // d/ds of the series; the top coefficient is lost and set to zero.
    Jet differentiated() const
    {
        Jet r;
        for (std::size_t k = 0; k + 1 < N; ++k) r.c_[k] = c_[k + 1] * double(k + 1);
        return r;
    }

    Jet operator-() const
    {
        Jet r;
        for (std::size_t k = 0; k < N; ++k) r.c_[k] = -c_[k];
        return r;
    }
    Jet& operator+=(const Jet& o)
    {
        for (std::size_t k = 0; k < N; ++k) c_[k] += o.c_[k];
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        for (std::size_t k = 0; k < N; ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Jet& operator*=(cplx a)
    {
        for (auto& x : c_) x *= a;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, cplx b) { return a *= b; }
    friend Jet operator*(cplx b, Jet a) { return a *= b; }
    friend Jet operator/(Jet a, cplx b) { return a *= (1.0 / b); }

    friend Jet operator*(const Jet& a, const Jet& b)
    {
        Jet r;
        for (std::size_t k = 0; k < N; ++k) {
            cplx acc{};
            for (std::size_t j = 0; j <= k; ++j) acc += a.c_[j] * b.c_[k - j];
            r.c_[k] = acc;
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b)
    {
        Jet r;
        for (std::size_t k = 0; k < N; ++k) {
            cplx acc = a.c_[k];
            for (std::size_t j = 1; j <= k; ++j) acc -= b.c_[j] * r.c_[k - j];
            r.c_[k] = acc / b.c_[0];
        }
        return r;
    }
    friend Jet operator/(cplx a, const Jet& b) { return Jet(a) / b; }

private:
    std::array<cplx, N> c_;
};

template <std::size_t N>
Jet<N> exp(const Jet<N>& a)
{
    Jet<N> r;
    r[0] = std::exp(a[0]);
    for (std::size_t k = 1; k < N; ++k) {
        cplx acc{};
        for (std::size_t j = 1; j <= k; ++j) acc += double(j) * a[j] * r[k - j];
        r[k] = acc / double(k);
    }
    return r;
}

template <std::size_t N>
Jet<N> log(const Jet<N>& a)
{
    Jet<N> r;
    r[0] = std::log(a[0]);
    for (std::size_t k = 1; k < N; ++k) {
        cplx acc = a[k];
        for (std::size_t j = 1; j < k; ++j) acc -= double(j) * r[j] * a[k - j] / double(k);
        r[k] = acc / a[0];
    }
    return r;
}

// a^p with the constant term supplied by the caller, which fixes the branch.
template <std::size_t N>
Jet<N> pow_with_root(const Jet<N>& a, cplx p, cplx root)
{
    Jet<N> r;
    r[0] = root;
    for (std::size_t k = 1; k < N; ++k) {
        cplx acc{};
        for (std::size_t j = 1; j <= k; ++j)
            acc += (p * double(j) - double(k - j)) * a[j] * r[k - j];
        r[k] = acc / (double(k) * a[0]);
    }
    return r;
}

template <std::size_t N>
Jet<N> pow(const Jet<N>& a, cplx p)
{
    return pow_with_root(a, p, std::pow(a[0], p));
}

template <std::size_t N>
Jet<N> ipow(Jet<N> a, long n)
{
    if (n < 0) return Jet<N>(1.0) / ipow(a, -n);
    Jet<N> r(1.0);
    while (n > 0) {
        if (n & 1) r = r * a;
        a = a * a;
        n >>= 1;
    }
    return r;
}

template <std::size_t N>
Jet<N> sqrt_with_root(const Jet<N>& a, cplx root)
{
    return pow_with_root(a, cplx(0.5), root);
}

template <std::size_t N>
void sincos(const Jet<N>& a, Jet<N>& s, Jet<N>& c)
{
    s = Jet<N>(std::sin(a[0]));
    c = Jet<N>(std::cos(a[0]));
    for (std::size_t k = 1; k < N; ++k) {
        cplx as{}, ac{};
        for (std::size_t j = 1; j <= k; ++j) {
            as += double(j) * a[j] * c[k - j];
            ac += double(j) * a[j] * s[k - j];
        }
        s[k] = as / double(k);
        c[k] = -ac / double(k);
    }
}

template <std::size_t N>
void sinhcosh(const Jet<N>& a, Jet<N>& s, Jet<N>& c)
{
    s = Jet<N>(std::sinh(a[0]));
    c = Jet<N>(std::cosh(a[0]));
    for (std::size_t k = 1; k < N; ++k) {
        cplx as{}, ac{};
        for (std::size_t j = 1; j <= k; ++j) {
            as += double(j) * a[j] * c[k - j];
            ac += double(j) * a[j] * s[k - j];
        }
        s[k] = as / double(k);
        c[k] = ac / double(k);
    }
}

template <std::size_t N>
Jet<N> sin(const Jet<N>& a) { Jet<N> s, c; sincos(a, s, c); return s; }
template <std::size_t N>
Jet<N> cos(const Jet<N>& a) { Jet<N> s, c; sincos(a, s, c); return c; }
template <std::size_t N>
Jet<N> tan(const Jet<N>& a) { Jet<N> s, c; sincos(a, s, c); return s / c; }
template <std::size_t N>
Jet<N> sinh(const Jet<N>& a) { Jet<N> s, c; sinhcosh(a, s, c); return s; }
template <std::size_t N>
Jet<N> cosh(const Jet<N>& a) { Jet<N> s, c; sinhcosh(a, s, c); return c; }
template <std::size_t N>
Jet<N> tanh(const Jet<N>& a) { Jet<N> s, c; sinhcosh(a, s, c); return s / c; }

// Orders 0..4 are enough for q2 (needs B'''') and the Omega kernel (needs q'').
using Jet5 = Jet<5>;

} // namespace adiabat
