#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <ostream>
#include <string>

#include "tap/error.hpp"

namespace tap {

// Exact rational, a thin wrapper over GMP's mpq_class.  Always kept canonical
// (gcd(num,den)=1, den>0).  Serialized as "p/q", or just "p" when q == 1; both
// forms parse back.  No floating point is ever involved in solver paths.
class Rat {
  public:
    Rat() : v_(0) {}
    Rat(long long num) : v_(static_cast<long>(num)) {}
    Rat(long long num, long long den) : v_(static_cast<long>(num), static_cast<long>(den)) {
        check(den != 0, "rational with zero denominator");
        v_.canonicalize();
    }
    explicit Rat(const mpq_class& v) : v_(v) { v_.canonicalize(); }

    static Rat parse(const std::string& s) {
        mpq_class v;
        if (v.set_str(s, 10) != 0) fail(ErrorKind::Malformed, "bad rational literal: '" + s + "'");
        v.canonicalize();
        return Rat(v);
    }

    std::string str() const { return v_.get_str(); }

    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    // Exact integer value; caller must know it fits (guarded).
    long long as_int() const {
        check(is_integer() && v_.get_num().fits_slong_p(), "rational is not a small integer");
        return v_.get_num().get_si();
    }

    double approx() const { return v_.get_d(); } // for log output only, never for decisions

    Rat operator-() const { return Rat(mpq_class(-v_)); }
    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
    Rat& operator/=(const Rat& o) {
        check(!o.is_zero(), "rational division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rat operator+(Rat a, const Rat& b) { return a += b; }
    friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
    friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
    friend Rat operator/(Rat a, const Rat& b) { return a /= b; }

    friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

    friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

  private:
    mpq_class v_;
};

inline Rat rat_min(const Rat& a, const Rat& b) { return a <= b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a >= b ? a : b; }

} // namespace tap
