#include "vassforge/relax.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <numeric>

namespace vassforge::lp {
namespace {

struct Overflow {};

// int64 fraction; any intermediate that leaves int64 throws Overflow and the
// caller redoes the solve with arbitrary precision.
class Rat {
  public:
    Rat() = default;
    Rat(std::int64_t n) : n_(n), d_(1) {}  // NOLINT

    static Rat make(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) throw Overflow{};
        Rat r;
        r.n_ = static_cast<std::int64_t>(n);
        r.d_ = static_cast<std::int64_t>(d);
        return r;
    }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return make(static_cast<__int128>(a.n_) * b.d_ + static_cast<__int128>(b.n_) * a.d_,
                    static_cast<__int128>(a.d_) * b.d_);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return make(static_cast<__int128>(a.n_) * b.d_ - static_cast<__int128>(b.n_) * a.d_,
                    static_cast<__int128>(a.d_) * b.d_);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return make(static_cast<__int128>(a.n_) * b.n_, static_cast<__int128>(a.d_) * b.d_);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        return make(static_cast<__int128>(a.n_) * b.d_, static_cast<__int128>(a.d_) * b.n_);
    }
    Rat operator-() const { return make(-static_cast<__int128>(n_), d_); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return static_cast<__int128>(a.n_) * b.d_ < static_cast<__int128>(b.n_) * a.d_;
    }
    friend bool operator==(const Rat& a, const Rat& b) { return a.n_ == b.n_ && a.d_ == b.d_; }
    int sign() const { return (n_ > 0) - (n_ < 0); }
    std::int64_t floor() const {
        std::int64_t q = n_ / d_;
        if ((n_ % d_ != 0) && (n_ < 0)) --q;
        return q;
    }

  private:
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }
    std::int64_t n_ = 0, d_ = 1;
};

using Big = boost::multiprecision::cpp_rational;

int sign_of(const Rat& r) { return r.sign(); }
int sign_of(const Big& r) { return r.sign(); }

std::int64_t floor_of(const Rat& r) { return r.floor(); }
std::int64_t floor_of(const Big& r) {
    using boost::multiprecision::cpp_int;
    cpp_int n = boost::multiprecision::numerator(r), d = boost::multiprecision::denominator(r);
    cpp_int q = n / d;
    if (n % d != 0 && n < 0) --q;
    if (q > INT64_MAX) return INT64_MAX;
    if (q < INT64_MIN) return INT64_MIN;
    return static_cast<std::int64_t>(q);
}

// Dense tableau simplex with Bland's rule.
template <class Q>
class Tableau {
  public:
    Tableau(const std::vector<Row>& rows, std::size_t nvars) : n_(nvars), m_(rows.size()) {
        std::size_t slacks = 0;
        for (const auto& r : rows)
            if (!r.equality) ++slacks;
        art0_ = n_ + slacks;
        cols_ = art0_ + m_;
        t_.assign(m_ + 1, std::vector<Q>(cols_ + 1, Q(0)));
        basis_.resize(m_);
        std::size_t s = n_;
        for (std::size_t i = 0; i < m_; ++i) {
            const Row& r = rows[i];
            // coef·k (- slack) = -constant
            for (std::size_t j = 0; j < n_ && j < r.coef.size(); ++j) t_[i][j] = Q(r.coef[j]);
            if (!r.equality) t_[i][s++] = Q(-1);
            t_[i][cols_] = Q(-r.constant);
            if (sign_of(t_[i][cols_]) < 0)
                for (auto& v : t_[i]) v = -v;
            t_[i][art0_ + i] = Q(1);
            basis_[i] = art0_ + i;
        }
    }

    // Phase one; true when feasible.
    bool phase_one() {
        auto& obj = t_[m_];
        for (std::size_t j = 0; j <= cols_; ++j) obj[j] = Q(0);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j <= cols_; ++j)
                if (j < art0_ || j == cols_) obj[j] = obj[j] - t_[i][j];
        optimise(art0_);
        if (sign_of(t_[m_][cols_]) != 0) return false;
        // Drive zero-level artificials out of the basis where possible.
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < art0_) continue;
            for (std::size_t j = 0; j < art0_; ++j)
                if (sign_of(t_[i][j]) != 0) {
                    pivot(i, j);
                    break;
                }
        }
        return true;
    }

    // Maximises objective·k after phase one; nullopt when unbounded.
    std::optional<Q> maximise(const std::vector<std::int64_t>& objective) {
        auto& obj = t_[m_];
        for (std::size_t j = 0; j <= cols_; ++j) obj[j] = Q(0);
        for (std::size_t j = 0; j < n_ && j < objective.size(); ++j) obj[j] = Q(-objective[j]);
        for (std::size_t i = 0; i < m_; ++i) {
            std::size_t bj = basis_[i];
            if (sign_of(obj[bj]) == 0) continue;
            Q f = obj[bj];
            for (std::size_t j = 0; j <= cols_; ++j) obj[j] = obj[j] - f * t_[i][j];
        }
        if (!optimise(art0_)) return std::nullopt;
        Q value(0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_ && basis_[i] < objective.size()) value = value + Q(objective[basis_[i]]) * t_[i][cols_];
        return value;
    }

  private:
    // Minimises the objective row over columns < limit; false when unbounded.
    bool optimise(std::size_t limit) {
        for (;;) {
            std::size_t enter = limit;
            for (std::size_t j = 0; j < limit; ++j)
                if (sign_of(t_[m_][j]) < 0) {
                    enter = j;
                    break;
                }
            if (enter == limit) return true;
            std::size_t leave = m_;
            Q best(0);
            for (std::size_t i = 0; i < m_; ++i) {
                if (sign_of(t_[i][enter]) <= 0) continue;
                Q ratio = t_[i][cols_] / t_[i][enter];
                if (leave == m_ || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        Q p = t_[r][c];
        for (auto& v : t_[r]) v = v / p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r || sign_of(t_[i][c]) == 0) continue;
            Q f = t_[i][c];
            for (std::size_t j = 0; j <= cols_; ++j)
                if (sign_of(t_[r][j]) != 0) t_[i][j] = t_[i][j] - f * t_[r][j];
        }
        basis_[r] = c;
    }

    std::size_t n_, m_, art0_ = 0, cols_ = 0;
    std::vector<std::vector<Q>> t_;
    std::vector<std::size_t> basis_;
};

template <class Q>
Result solve(const std::vector<Row>& rows, std::size_t nvars, const std::vector<std::int64_t>* objective,
             std::int64_t objective_constant) {
    Tableau<Q> t(rows, nvars);
    if (!t.phase_one()) return {Status::Infeasible, 0};
    if (!objective) return {Status::Feasible, 0};
    auto v = t.maximise(*objective);
    if (!v) return {Status::Unbounded, 0};
    Q total = *v + Q(objective_constant);
    return {Status::Feasible, floor_of(total)};
}

template <class... A>
Result solve_any(const std::vector<Row>& rows, std::size_t nvars, const std::vector<std::int64_t>* objective,
                 std::int64_t c) {
    try {
        return solve<Rat>(rows, nvars, objective, c);
    } catch (const Overflow&) {
        return solve<Big>(rows, nvars, objective, c);
    }
}

}  // namespace

Result feasible(const std::vector<Row>& rows, std::size_t nvars) { return solve_any(rows, nvars, nullptr, 0); }

Result maximise(const std::vector<Row>& rows, std::size_t nvars, const std::vector<std::int64_t>& objective,
                std::int64_t objective_constant) {
    return solve_any(rows, nvars, &objective, objective_constant);
}

}  // namespace vassforge::lp
