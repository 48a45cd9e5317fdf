#pragma once

#include "robusthedge/errors.hpp"
#include "robusthedge/numeric.hpp"

#include <algorithm>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

/// Dense two-phase simplex over an arbitrary ordered field.
///
/// With T = Rational the solver is exact: every outcome carries a
/// certificate (dual vector, Farkas multipliers or improving ray) that
/// `check_outcome` verifies by plain matrix arithmetic.
namespace robusthedge::lp {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };

template <class T>
struct Row {
    std::vector<std::pair<std::size_t, T>> terms;
    Relation rel = Relation::Equal;
    T rhs = 0;

    T activity(const std::vector<T>& x) const {
        T s = 0;
        for (const auto& [j, a] : terms) s += a * x[j];
        return s;
    }
};

template <class T>
struct Bounds {
    std::optional<T> lower;
    std::optional<T> upper;
};

template <class T>
class LinearProgram {
public:
    explicit LinearProgram(Sense sense = Sense::Minimize) : sense_(sense) {}

    /// Adds a variable; both bounds default to infinite.
    std::size_t add_variable(std::optional<T> lower = std::nullopt, std::optional<T> upper = std::nullopt,
                             T cost = T(0)) {
        bounds_.push_back({std::move(lower), std::move(upper)});
        objective_.push_back(std::move(cost));
        return bounds_.size() - 1;
    }
    void set_cost(std::size_t j, T c) { objective_.at(j) = std::move(c); }

    std::size_t add_row(std::vector<std::pair<std::size_t, T>> terms, Relation rel, T rhs) {
        for (const auto& t : terms)
            if (t.first >= bounds_.size()) throw std::out_of_range("row references an undeclared variable");
        rows_.push_back({std::move(terms), rel, std::move(rhs)});
        return rows_.size() - 1;
    }
    /// Dense convenience overload; zero coefficients are dropped.
    std::size_t add_dense_row(const std::vector<T>& coeffs, Relation rel, T rhs) {
        std::vector<std::pair<std::size_t, T>> terms;
        for (std::size_t j = 0; j < coeffs.size(); ++j)
            if (coeffs[j] != 0) terms.emplace_back(j, coeffs[j]);
        return add_row(std::move(terms), rel, std::move(rhs));
    }

    Sense sense() const { return sense_; }
    std::size_t num_vars() const { return bounds_.size(); }
    std::size_t num_rows() const { return rows_.size(); }
    const std::vector<T>& objective() const { return objective_; }
    const std::vector<Row<T>>& rows() const { return rows_; }
    const std::vector<Bounds<T>>& bounds() const { return bounds_; }

    T objective_value(const std::vector<T>& x) const { return dot(objective_, x); }

private:
    Sense sense_;
    std::vector<T> objective_;
    std::vector<Row<T>> rows_;
    std::vector<Bounds<T>> bounds_;
};

template <class T>
struct Optimal {
    T value;
    std::vector<T> primal;
    /// One entry per row: the rate of change of the optimal value in the
    /// row's right-hand side.
    std::vector<T> dual;
};

/// Row multipliers y with y_i <= 0 on <= rows and y_i >= 0 on >= rows such
/// that max over the variable box of (A^T y).x is strictly below b.y.
template <class T>
struct Infeasible {
    std::vector<T> farkas;
};

template <class T>
struct Unbounded {
    std::vector<T> point;
    std::vector<T> ray;
};

template <class T>
using Outcome = std::variant<Optimal<T>, Infeasible<T>, Unbounded<T>>;

template <class T>
bool is_optimal(const Outcome<T>& o) { return std::holds_alternative<Optimal<T>>(o); }

namespace detail {

inline std::mutex& dump_mutex() {
    static std::mutex m;
    return m;
}
inline std::ostream*& dump_sink() {
    static std::ostream* sink = nullptr;
    return sink;
}

template <class T>
std::string text_of(const T& v) {
    if constexpr (std::is_same_v<T, Rational>)
        return to_fraction_string(v);
    else
        return decimal_string(static_cast<double>(v));
}

}  // namespace detail

/// Writes `lp` in the plain-text debug format: an objective line, one
/// "coeffs rel rhs" line per constraint, then one bounds line per variable.
template <class T>
void write_lp(std::ostream& os, const LinearProgram<T>& lp) {
    const auto n = lp.num_vars();
    os << "lp " << n << " variables " << lp.num_rows() << " constraints\n";
    os << (lp.sense() == Sense::Minimize ? "min" : "max");
    for (const auto& c : lp.objective()) os << ' ' << detail::text_of(c);
    os << '\n';
    for (const auto& r : lp.rows()) {
        std::vector<T> dense(n, T(0));
        for (const auto& [j, a] : r.terms) dense[j] += a;
        for (const auto& a : dense) os << detail::text_of(a) << ' ';
        os << (r.rel == Relation::LessEqual ? "<=" : r.rel == Relation::Equal ? "=" : ">=") << ' '
           << detail::text_of(r.rhs) << '\n';
    }
    for (std::size_t j = 0; j < n; ++j) {
        const auto& b = lp.bounds()[j];
        os << "bound " << j << ' ' << (b.lower ? detail::text_of(*b.lower) : "-inf") << ' '
           << (b.upper ? detail::text_of(*b.upper) : "+inf") << '\n';
    }
    os << "end\n";
}

/// Routes every subsequently solved LP to `sink` (nullptr disables).
inline void set_dump_sink(std::ostream* sink) {
    std::lock_guard lock(detail::dump_mutex());
    detail::dump_sink() = sink;
}

namespace detail {

template <class T>
class Simplex {
public:
    Simplex(const LinearProgram<T>& lp, const Arith<T>& arith) : lp_(lp), a_(arith) { build(); }

    Outcome<T> run() {
        const std::size_t n_total = ncols_;
        // Phase 1: minimize the sum of artificials.
        if (num_art_ > 0) {
            std::vector<T> cost(n_total, T(0));
            for (std::size_t c = art_begin_; c < n_total; ++c) cost[c] = 1;
            set_objective(cost);
            if (iterate()) throw InternalError("phase one cannot be unbounded");
            if (is_pos(a_, T(-obj_[rhs_col()]))) return Infeasible<T>{farkas()};
            drive_out_artificials();
        }
        std::vector<T> cost(n_total, T(0));
        for (std::size_t c = 0; c < nz_; ++c) cost[c] = zcost_[c];
        set_objective(cost);
        if (auto col = iterate()) return unbounded(*col);
        return optimal();
    }

private:
    struct Substitution {
        T offset = 0;
        std::vector<std::pair<std::size_t, T>> cols;  // x_j = offset + sum coef * z_col
    };

    std::size_t rhs_col() const { return ncols_; }

    void build() {
        const auto& L = lp_;
        const std::size_t nx = L.num_vars();
        subs_.resize(nx);
        std::vector<std::pair<std::size_t, T>> ub_rows;  // (z column, u - l)
        nz_ = 0;
        for (std::size_t j = 0; j < nx; ++j) {
            const auto& b = L.bounds()[j];
            auto& s = subs_[j];
            if (b.lower) {
                s.offset = *b.lower;
                s.cols.emplace_back(nz_, T(1));
                if (b.upper) {
                    if (*b.upper < *b.lower) {
                        contradictory_bounds_ = true;
                    }
                    ub_rows.emplace_back(nz_, T(*b.upper - *b.lower));
                }
                ++nz_;
            } else if (b.upper) {
                s.offset = *b.upper;
                s.cols.emplace_back(nz_++, T(-1));
            } else {
                s.cols.emplace_back(nz_++, T(1));
                s.cols.emplace_back(nz_++, T(-1));
            }
        }
        const T sgn = L.sense() == Sense::Minimize ? T(1) : T(-1);
        zcost_.assign(nz_, T(0));
        for (std::size_t j = 0; j < nx; ++j)
            for (const auto& [c, k] : subs_[j].cols) zcost_[c] += sgn * L.objective()[j] * k;

        struct StdRow {
            std::vector<std::pair<std::size_t, T>> terms;
            int slack = 0;  // +1, -1, or 0 for equality
            T rhs;
        };
        std::vector<StdRow> rows;
        for (const auto& r : L.rows()) {
            StdRow s;
            std::vector<T> dense(nz_, T(0));
            T rhs = r.rhs;
            for (const auto& [j, coef] : r.terms) {
                rhs -= coef * subs_[j].offset;
                for (const auto& [c, k] : subs_[j].cols) dense[c] += coef * k;
            }
            for (std::size_t c = 0; c < nz_; ++c)
                if (dense[c] != 0) s.terms.emplace_back(c, dense[c]);
            s.slack = r.rel == Relation::LessEqual ? 1 : r.rel == Relation::GreaterEqual ? -1 : 0;
            s.rhs = rhs;
            rows.push_back(std::move(s));
        }
        m_orig_ = rows.size();
        for (const auto& [c, width] : ub_rows) rows.push_back({{{c, T(1)}}, 1, width});

        const std::size_t m = rows.size();
        std::size_t ns = 0;
        for (const auto& r : rows) ns += r.slack != 0;
        flip_.assign(m, 1);
        std::vector<bool> needs_art(m, false);
        num_art_ = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (a_.sign(rows[i].rhs) < 0) flip_[i] = -1;
            if (rows[i].slack * flip_[i] != 1) {
                needs_art[i] = true;
                ++num_art_;
            }
        }
        slack_begin_ = nz_;
        art_begin_ = nz_ + ns;
        ncols_ = art_begin_ + num_art_;
        tab_.assign(m, std::vector<T>(ncols_ + 1, T(0)));
        basis_.assign(m, 0);
        init_col_.assign(m, 0);
        std::size_t next_slack = slack_begin_, next_art = art_begin_;
        for (std::size_t i = 0; i < m; ++i) {
            const T f = flip_[i];
            auto& row = tab_[i];
            for (const auto& [c, v] : rows[i].terms) row[c] = f * v;
            row[rhs_col()] = f * rows[i].rhs;
            std::optional<std::size_t> slack_col;
            if (rows[i].slack != 0) {
                slack_col = next_slack++;
                row[*slack_col] = f * T(rows[i].slack);
            }
            if (needs_art[i]) {
                row[next_art] = 1;
                basis_[i] = init_col_[i] = next_art++;
            } else {
                basis_[i] = init_col_[i] = *slack_col;
            }
        }
    }

    void set_objective(const std::vector<T>& cost) {
        cost_ = cost;
        obj_.assign(ncols_ + 1, T(0));
        for (std::size_t c = 0; c < ncols_; ++c) obj_[c] = cost[c];
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            const T& cb = cost[basis_[i]];
            if (cb == 0) continue;
            for (std::size_t c = 0; c <= ncols_; ++c)
                if (tab_[i][c] != 0) obj_[c] -= cb * tab_[i][c];
        }
    }

    void pivot(std::size_t r, std::size_t col) {
        auto& prow = tab_[r];
        const T piv = prow[col];
        std::vector<std::size_t> nz;
        for (std::size_t c = 0; c <= ncols_; ++c) {
            if (prow[c] == 0) continue;
            prow[c] /= piv;
            nz.push_back(c);
        }
        auto eliminate = [&](std::vector<T>& row) {
            if (row[col] == 0) return;
            const T factor = row[col];
            for (std::size_t c : nz) row[c] -= factor * prow[c];
            if constexpr (!Arith<T>::exact) row[col] = 0;
        };
        for (std::size_t i = 0; i < tab_.size(); ++i)
            if (i != r) eliminate(tab_[i]);
        eliminate(obj_);
        basis_[r] = col;
    }

    /// Runs simplex iterations on the current objective. Returns the entering
    /// column if the problem is unbounded in it.
    std::optional<std::size_t> iterate() {
        std::size_t degenerate_run = 0;
        bool bland = false;
        std::size_t iterations = 0;
        const std::size_t limit = Arith<T>::exact ? std::size_t(-1) : 200 * (tab_.size() + ncols_ + 10);
        while (true) {
            if (++iterations > limit) throw NumericalBreakdown("simplex iteration limit exceeded");
            std::optional<std::size_t> enter;
            for (std::size_t c = 0; c < art_begin_; ++c) {
                if (!is_neg(a_, obj_[c])) continue;
                if (!enter) {
                    enter = c;
                    if (bland) break;
                } else if (obj_[c] < obj_[*enter]) {
                    enter = c;
                }
            }
            if (!enter) return std::nullopt;
            std::optional<std::size_t> leave;
            T best_ratio = 0;
            for (std::size_t i = 0; i < tab_.size(); ++i) {
                if (!is_pos(a_, tab_[i][*enter])) continue;
                T ratio = tab_[i][rhs_col()] / tab_[i][*enter];
                if (!leave || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[*leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (!leave) return enter;
            if (is_zero(a_, best_ratio)) {
                if (++degenerate_run > 50) bland = true;
            } else {
                degenerate_run = 0;
            }
            pivot(*leave, *enter);
        }
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            if (basis_[i] < art_begin_) continue;
            for (std::size_t c = 0; c < art_begin_; ++c) {
                if (!is_zero(a_, tab_[i][c])) {
                    pivot(i, c);
                    break;
                }
            }
        }
    }

    /// Row multipliers c_B B^-1 for the standard-form rows.
    std::vector<T> simplex_multipliers() const {
        const std::size_t m = tab_.size();
        std::vector<T> y(m, T(0));
        for (std::size_t k = 0; k < m; ++k) {
            const T& cb = cost_[basis_[k]];
            if (cb == 0) continue;
            for (std::size_t i = 0; i < m; ++i)
                if (tab_[k][init_col_[i]] != 0) y[i] += cb * tab_[k][init_col_[i]];
        }
        return y;
    }

    std::vector<T> farkas() const {
        auto pi = simplex_multipliers();
        std::vector<T> y(m_orig_);
        for (std::size_t i = 0; i < m_orig_; ++i) y[i] = T(flip_[i]) * pi[i];
        return y;
    }

    std::vector<T> z_values() const {
        std::vector<T> z(ncols_, T(0));
        for (std::size_t i = 0; i < tab_.size(); ++i) z[basis_[i]] = tab_[i][rhs_col()];
        return z;
    }

    std::vector<T> to_x(const std::vector<T>& z, bool with_offset) const {
        std::vector<T> x(subs_.size());
        for (std::size_t j = 0; j < subs_.size(); ++j) {
            T v = with_offset ? subs_[j].offset : T(0);
            for (const auto& [c, k] : subs_[j].cols) v += k * z[c];
            x[j] = v;
        }
        return x;
    }

    Outcome<T> unbounded(std::size_t col) const {
        std::vector<T> dz(ncols_, T(0));
        dz[col] = 1;
        for (std::size_t i = 0; i < tab_.size(); ++i) dz[basis_[i]] = -tab_[i][col];
        return Unbounded<T>{to_x(z_values(), true), to_x(dz, false)};
    }

    Outcome<T> optimal() const {
        Optimal<T> o;
        o.primal = to_x(z_values(), true);
        o.value = lp_.objective_value(o.primal);
        auto pi = simplex_multipliers();
        const T sgn = lp_.sense() == Sense::Minimize ? T(1) : T(-1);
        o.dual.resize(m_orig_);
        for (std::size_t i = 0; i < m_orig_; ++i) o.dual[i] = sgn * T(flip_[i]) * pi[i];
        return o;
    }

    const LinearProgram<T>& lp_;
    Arith<T> a_;
    std::vector<Substitution> subs_;
    std::vector<T> zcost_;
    std::vector<int> flip_;
    std::size_t nz_ = 0, m_orig_ = 0, slack_begin_ = 0, art_begin_ = 0, ncols_ = 0, num_art_ = 0;
    bool contradictory_bounds_ = false;
    std::vector<std::vector<T>> tab_;
    std::vector<T> obj_;
    std::vector<T> cost_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> init_col_;

public:
    bool contradictory_bounds() const { return contradictory_bounds_; }
};

}  // namespace detail

/// Certificate check independent of the simplex code path. Returns an empty
/// string on success, otherwise a description of the first violation.
template <class T>
std::string check_outcome(const LinearProgram<T>& lp, const Outcome<T>& outcome, const Arith<T>& a = {}) {
    const auto n = lp.num_vars();
    auto primal_feasible = [&](const std::vector<T>& x) -> std::string {
        if (x.size() != n) return "primal has wrong length";
        for (std::size_t j = 0; j < n; ++j) {
            const auto& b = lp.bounds()[j];
            if (b.lower && is_neg(a, T(x[j] - *b.lower))) return "variable " + std::to_string(j) + " below its bound";
            if (b.upper && is_pos(a, T(x[j] - *b.upper))) return "variable " + std::to_string(j) + " above its bound";
        }
        for (std::size_t i = 0; i < lp.num_rows(); ++i) {
            const auto& r = lp.rows()[i];
            const T slack = r.activity(x) - r.rhs;
            const int s = a.sign(slack);
            if ((r.rel == Relation::LessEqual && s > 0) || (r.rel == Relation::GreaterEqual && s < 0) ||
                (r.rel == Relation::Equal && s != 0))
                return "row " + std::to_string(i) + " violated";
        }
        return {};
    };
    // Multipliers in minimization form with sign conventions of the rows.
    auto row_sign_ok = [&](Relation rel, const T& y, int want_on_ge) {
        const int s = a.sign(y);
        if (rel == Relation::GreaterEqual) return s * want_on_ge >= 0;
        if (rel == Relation::LessEqual) return s * want_on_ge <= 0;
        return true;
    };

    if (const auto* opt = std::get_if<Optimal<T>>(&outcome)) {
        if (auto err = primal_feasible(opt->primal); !err.empty()) return err;
        if (!approx_eq(a, opt->value, lp.objective_value(opt->primal))) return "value does not match primal";
        if (opt->dual.size() != lp.num_rows()) return "dual has wrong length";
        const T sgn = lp.sense() == Sense::Minimize ? T(1) : T(-1);
        std::vector<T> reduced(n);
        for (std::size_t j = 0; j < n; ++j) reduced[j] = sgn * lp.objective()[j];
        T dual_value = 0;
        for (std::size_t i = 0; i < lp.num_rows(); ++i) {
            const auto& r = lp.rows()[i];
            const T y = sgn * opt->dual[i];
            if (!row_sign_ok(r.rel, y, 1)) return "dual sign wrong on row " + std::to_string(i);
            dual_value += y * r.rhs;
            for (const auto& [j, coef] : r.terms) reduced[j] -= coef * y;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const auto& b = lp.bounds()[j];
            const int s = a.sign(reduced[j]);
            if (s > 0) {
                if (!b.lower) return "reduced cost of free-below variable " + std::to_string(j) + " is positive";
                dual_value += reduced[j] * *b.lower;
            } else if (s < 0) {
                if (!b.upper) return "reduced cost of free-above variable " + std::to_string(j) + " is negative";
                dual_value += reduced[j] * *b.upper;
            }
        }
        if (!approx_eq(a, T(sgn * opt->value), dual_value)) return "duality gap";
        return {};
    }
    if (const auto* inf = std::get_if<Infeasible<T>>(&outcome)) {
        for (const auto& b : lp.bounds())
            if (b.lower && b.upper && *b.upper < *b.lower) return {};
        if (inf->farkas.size() != lp.num_rows()) return "certificate has wrong length";
        std::vector<T> w(n, T(0));
        T by = 0;
        for (std::size_t i = 0; i < lp.num_rows(); ++i) {
            const auto& r = lp.rows()[i];
            const T& y = inf->farkas[i];
            if (!row_sign_ok(r.rel, y, 1)) return "certificate sign wrong on row " + std::to_string(i);
            by += y * r.rhs;
            for (const auto& [j, coef] : r.terms) w[j] += coef * y;
        }
        T box_max = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto& b = lp.bounds()[j];
            const int s = a.sign(w[j]);
            if (s > 0) {
                if (!b.upper) return "certificate unbounded on variable " + std::to_string(j);
                box_max += w[j] * *b.upper;
            } else if (s < 0) {
                if (!b.lower) return "certificate unbounded on variable " + std::to_string(j);
                box_max += w[j] * *b.lower;
            }
        }
        if (!is_neg(a, T(box_max - by))) return "certificate does not separate";
        return {};
    }
    const auto& unb = std::get<Unbounded<T>>(outcome);
    if (auto err = primal_feasible(unb.point); !err.empty()) return "unbounded point infeasible: " + err;
    if (unb.ray.size() != n) return "ray has wrong length";
    for (std::size_t j = 0; j < n; ++j) {
        const auto& b = lp.bounds()[j];
        if (b.lower && is_neg(a, unb.ray[j])) return "ray leaves lower bound";
        if (b.upper && is_pos(a, unb.ray[j])) return "ray leaves upper bound";
    }
    for (std::size_t i = 0; i < lp.num_rows(); ++i) {
        const auto& r = lp.rows()[i];
        const int s = a.sign(r.activity(unb.ray));
        if ((r.rel == Relation::LessEqual && s > 0) || (r.rel == Relation::GreaterEqual && s < 0) ||
            (r.rel == Relation::Equal && s != 0))
            return "ray violates row " + std::to_string(i);
    }
    const T gain = lp.objective_value(unb.ray);
    if (lp.sense() == Sense::Minimize ? !is_neg(a, gain) : !is_pos(a, gain)) return "ray does not improve";
    return {};
}

/// Solves `lp`. Exact for rationals; for doubles the Arith tolerance decides
/// signs and NumericalBreakdown signals that an exact re-solve is needed.
template <class T>
Outcome<T> solve(const LinearProgram<T>& lp, const Arith<T>& arith = {}) {
    {
        std::lock_guard lock(detail::dump_mutex());
        if (auto* sink = detail::dump_sink()) write_lp(*sink, lp);
    }
    detail::Simplex<T> simplex(lp, arith);
    if (simplex.contradictory_bounds()) {
        // Lower bound above upper bound: no row multipliers are needed.
        return Infeasible<T>{std::vector<T>(lp.num_rows(), T(0))};
    }
    Outcome<T> out = simplex.run();
    if constexpr (!Arith<T>::exact) {
        Arith<T> loose{std::max(arith.tol, 1e-9) * 1e3};
        if (!check_outcome(lp, out, loose).empty())
            throw NumericalBreakdown("floating-point certificate failed verification: " + check_outcome(lp, out, loose));
    }
    return out;
}

}  // namespace robusthedge::lp
