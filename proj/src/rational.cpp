#include "porosity/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace porosity {

namespace {

bool is_integer_literal(std::string_view s)
{
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

Integer parse_integer(std::string_view s)
{
    if (!is_integer_literal(s))
        throw std::invalid_argument("malformed rational: '" + std::string(s) + "'");
    std::string digits(s[0] == '+' ? s.substr(1) : s);
    return Integer(digits, 10);
}

}  // namespace

Rational parse_rational(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) throw std::invalid_argument("malformed rational: empty string");

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Integer num = parse_integer(text.substr(0, slash));
        Integer den = parse_integer(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("malformed rational: zero denominator in '" + std::string(text) + "'");
        Rational r(num, den);
        r.canonicalize();
        return r;
    }

    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = text.substr(0, dot);
        std::string_view frac_part = text.substr(dot + 1);
        bool negative = !int_part.empty() && int_part[0] == '-';
        if (!int_part.empty() && (int_part[0] == '-' || int_part[0] == '+')) int_part.remove_prefix(1);
        if (int_part.empty()) int_part = "0";
        if (frac_part.empty() || !is_integer_literal(frac_part) || frac_part[0] == '-' || frac_part[0] == '+')
            throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
        Integer whole = parse_integer(int_part);
        Integer frac = parse_integer(frac_part);
        Integer scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac_part.size());
        Rational r(whole * scale + frac, scale);
        r.canonicalize();
        return negative ? Rational(-r) : r;
    }

    return Rational(parse_integer(text));
}

std::string to_string(const Rational& raw)
{
    Rational value = raw;
    value.canonicalize();
    if (value.get_den() == 1) return value.get_num().get_str();
    return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Integer floor(const Rational& value)
{
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
    return q;
}

Integer ceil(const Rational& value)
{
    Integer q;
    mpz_cdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
    return q;
}

Rational pow2_neg(unsigned k)
{
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, k);
    return Rational(Integer(1), den);
}

double to_double(const Rational& value)
{
    return value.get_d();
}

std::uint64_t fixed_point_floor(const Rational& value, unsigned bits)
{
    if (sgn(value) < 0) return 0;
    if (value >= 1) return (std::uint64_t{1} << bits) - 1;
    Integer scaled = value.get_num();
    scaled <<= bits;
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), scaled.get_mpz_t(), value.get_den_mpz_t());
    return static_cast<std::uint64_t>(q.get_ui());
}

}  // namespace porosity
