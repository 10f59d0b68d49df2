#include "levystab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace levystab {

namespace {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                            0.741531185599394, 0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.0};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                            0.140653259715525, 0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

inline double vnorm(double v) { return std::abs(v); }
inline double vnorm(std::complex<double> v) { return std::abs(v); }

template <class V>
struct Piece {
    std::function<V(double)> g;
    double a, b;
};

template <class V>
struct Segment {
    double a, b;
    V val;
    double err;
    size_t piece;
    bool dead = false;
};

template <class V>
Segment<V> gk15(const Piece<V>& p, size_t piece, double a, double b) {
    double h = 0.5 * (b - a);
    double mid = 0.5 * (a + b);
    V resk = kWgk[7] * p.g(mid);
    V resg = kWg[3] * p.g(mid);
    for (int i = 0; i < 7; ++i) {
        V fs = p.g(mid - h * kXgk[i]) + p.g(mid + h * kXgk[i]);
        resk += kWgk[i] * fs;
        if (i % 2 == 1) resg += kWg[i / 2] * fs;
    }
    return Segment<V>{a, b, h * resk, vnorm(h * (resk - resg)), piece};
}

template <class V>
V adaptive(const std::vector<Piece<V>>& pieces, const QuadratureConfig& cfg, const char* what) {
    std::vector<Segment<V>> segs;
    segs.reserve(256);
    for (size_t i = 0; i < pieces.size(); ++i)
        segs.push_back(gk15(pieces[i], i, pieces[i].a, pieces[i].b));

    using Entry = std::pair<double, size_t>; // (error snapshot, segment index)
    std::priority_queue<Entry> heap;
    V total{};
    double toterr = 0.0;
    for (size_t i = 0; i < segs.size(); ++i) {
        total += segs[i].val;
        toterr += segs[i].err;
        heap.push({segs[i].err, i});
    }

    int n = static_cast<int>(segs.size());
    while (toterr > std::max(cfg.abs_tol, cfg.rel_tol * vnorm(total))) {
        if (heap.empty())
            throw QuadratureError(std::string(what) + ": tolerance not reachable (intervals "
                                                      "exhausted at the resolution limit)",
                                  vnorm(total), toterr);
        if (n >= cfg.max_intervals)
            throw QuadratureError(std::string(what) + ": no convergence within max intervals",
                                  vnorm(total), toterr);
        auto [e, idx] = heap.top();
        heap.pop();
        Segment<V>& s = segs[idx];
        if (s.dead || e != s.err) continue; // stale entry
        if (s.b - s.a < 1e-14 * std::max({1.0, std::abs(s.a), std::abs(s.b)}))
            continue; // cannot refine further; its error stays counted
        const Piece<V>& p = pieces[s.piece];
        double mid = 0.5 * (s.a + s.b);
        Segment<V> left = gk15(p, s.piece, s.a, mid);
        Segment<V> right = gk15(p, s.piece, mid, s.b);
        total += left.val + right.val - s.val;
        toterr += left.err + right.err - s.err;
        s.dead = true;
        segs.push_back(left);
        heap.push({left.err, segs.size() - 1});
        segs.push_back(right);
        heap.push({right.err, segs.size() - 1});
        ++n;
        if (!std::isfinite(vnorm(total)))
            throw QuadratureError(std::string(what) + ": integrand not finite", vnorm(total),
                                  toterr);
    }
    return total;
}

int class_order(IntegrandClass cls) {
    switch (cls) {
        case IntegrandClass::quadratic_near_zero: return 2;
        case IntegrandClass::linear_near_zero: return 1;
        case IntegrandClass::bounded_near_zero: return 0;
    }
    return 2;
}

// Evaluator contract: V operator()(double x, double lw) where exp(lw)
// carries |x|^ord * density(x) * jacobian, assembled in log space so the
// exponential density decay is applied before anything can overflow.

struct PlainEval {
    std::function<double(double)> f;
    int ord;
    double operator()(double x, double lw) const {
        if (lw < -745.0) return 0.0;
        double v = f(x);
        if (ord == 1) v /= std::abs(x);
        else if (ord == 2) v /= x * x;
        return v * std::exp(lw);
    }
};

struct LogEval {
    std::function<double(double)> log_f;
    int ord;
    double operator()(double x, double lw) const {
        double e = log_f(x) - ord * std::log(std::abs(x)) + lw;
        return e < -745.0 ? 0.0 : std::exp(e);
    }
};

struct ComplexEval {
    std::function<std::complex<double>(double)> f;
    int ord;
    std::complex<double> operator()(double x, double lw) const {
        if (lw < -745.0) return {0.0, 0.0};
        std::complex<double> v = f(x);
        if (ord == 1) v /= std::abs(x);
        else if (ord == 2) v /= x * x;
        return v * std::exp(lw);
    }
};

struct SideParams {
    int sign;     // +1 right tail, -1 left tail
    double decay; // exponential decay rate of the density on this side
    double a;     // singularity order
    double lC;    // log C
};

SideParams side_params(const LevyModel& m, int sign) {
    return {sign, sign > 0 ? m.N : m.M, m.singularity_order(), std::log(m.C)};
}

// (0, s1] with the power substitution x = t^p, p = 1/(ord - a); the
// integrand becomes bounded for the declared class.
template <class V, class Eval>
Piece<V> near_piece(const SideParams& sp, Eval ev, int ord, double s1) {
    if (ord - sp.a <= 0.0)
        throw DivergenceError("integrate_levy: integrand class not integrable against the "
                              "|x|^{-1-alpha} singularity");
    double p = 1.0 / (ord - sp.a);
    double eps = p * (ord - sp.a) - 1.0; // zero up to roundoff
    double t1 = std::pow(s1, 1.0 / p);
    int sign = sp.sign;
    double decay = sp.decay, lC = sp.lC, lp = std::log(p);
    return {[=](double t) -> V {
                if (t <= 0.0) return V{};
                double lt = std::log(t);
                double x = std::exp(p * lt);
                if (x == 0.0) return V{};
                double lw = lC - decay * x + lp + eps * lt;
                return ev(sign > 0 ? x : -x, lw);
            },
            0.0, t1};
}

// plain segment [lo, hi] away from 0
template <class V, class Eval>
Piece<V> plain_piece(const SideParams& sp, Eval ev, int ord, double lo, double hi) {
    int sign = sp.sign;
    double decay = sp.decay, a = sp.a, lC = sp.lC;
    return {[=](double x) -> V {
                double lw = ord * std::log(x) + lC - decay * x - (1.0 + a) * std::log(x);
                return ev(sign > 0 ? x : -x, lw);
            },
            lo, hi};
}

// [sk, ∞): x = sk - ln w for exponential tails, x = sk w^{-1/a} for pure
// power tails (a > 0).  The exponential map gets an extra power cushion
// w = v^6 so that residual w^{-γ} endpoint singularities (integrands whose
// exponential growth nearly cancels the density decay) stay resolvable.
template <class V, class Eval>
Piece<V> tail_piece(const SideParams& sp, Eval ev, int ord, double sk) {
    int sign = sp.sign;
    double decay = sp.decay, a = sp.a, lC = sp.lC;
    if (decay > 0.0) {
        constexpr double m = 6.0;
        const double lm = std::log(m);
        return {[=](double v) -> V {
                    if (v <= 0.0) return V{};
                    double lv = std::log(v);
                    double x = sk - m * lv;
                    // jacobian of x = sk - m ln v against 1/w dw: log(m/v)
                    double lw = ord * std::log(x) + lC - decay * x - (1.0 + a) * std::log(x) +
                                lm - lv;
                    return ev(sign > 0 ? x : -x, lw);
                },
                0.0, 1.0};
    }
    if (a <= 0.0)
        throw DivergenceError("integrate_levy: undamped tail with alpha <= 0 has infinite mass");
    return {[=](double w) -> V {
                if (w <= 0.0) return V{};
                double x = sk * std::pow(w, -1.0 / a);
                if (!std::isfinite(x)) return V{};
                double lw = lC + ord * std::log(x) - a * std::log(sk) - std::log(a);
                return ev(sign > 0 ? x : -x, lw);
            },
            0.0, 1.0};
}

template <class V, class Eval>
void build_side(std::vector<Piece<V>>& out, const LevyModel& m, const Eval& ev,
                IntegrandClass cls, const QuadratureConfig& cfg, int sign) {
    SideParams sp = side_params(m, sign);
    int ord = class_order(cls);

    std::vector<double> splits;
    for (double s : cfg.split_points)
        if (sign * s > 0.0) splits.push_back(std::abs(s));
    std::sort(splits.begin(), splits.end());
    if (splits.empty()) splits.push_back(1.0);

    if (cfg.singularity_transform == SingularityTransform::power_transform)
        out.push_back(near_piece<V>(sp, ev, ord, splits.front()));
    else
        out.push_back(plain_piece<V>(sp, ev, ord, 1e-10, splits.front()));
    for (size_t i = 0; i + 1 < splits.size(); ++i)
        out.push_back(plain_piece<V>(sp, ev, ord, splits[i], splits[i + 1]));
    out.push_back(tail_piece<V>(sp, ev, ord, splits.back()));
}

template <class V, class Eval>
V integrate_impl(const LevyModel& m, const Eval& ev, IntegrandClass cls,
                 const QuadratureConfig& cfg, const char* what) {
    if (!m.has_jumps()) return V{};
    std::vector<Piece<V>> pieces;
    build_side<V>(pieces, m, ev, cls, cfg, +1);
    if (m.has_negative_jumps()) build_side<V>(pieces, m, ev, cls, cfg, -1);
    return adaptive(pieces, cfg, what);
}

} // namespace

double integrate_levy(const LevyModel& model, const std::function<double(double)>& f,
                      IntegrandClass cls, const QuadratureConfig& cfg) {
    return integrate_impl<double>(model, PlainEval{f, class_order(cls)}, cls, cfg,
                                  "integrate_levy");
}

double integrate_levy_log(const LevyModel& model, const std::function<double(double)>& log_f,
                          IntegrandClass cls, const QuadratureConfig& cfg) {
    return integrate_impl<double>(model, LogEval{log_f, class_order(cls)}, cls, cfg,
                                  "integrate_levy_log");
}

std::complex<double> integrate_levy_complex(const LevyModel& model,
                                            const std::function<std::complex<double>(double)>& f,
                                            IntegrandClass cls, const QuadratureConfig& cfg) {
    return integrate_impl<std::complex<double>>(model, ComplexEval{f, class_order(cls)}, cls, cfg,
                                                "integrate_levy_complex");
}

double integrate_levy_interval(const LevyModel& model, const std::function<double(double)>& f,
                               double a, double b, IntegrandClass cls,
                               const QuadratureConfig& cfg) {
    if (!model.has_jumps() || a >= b) return 0.0;
    if (a < 0.0 && b > 0.0)
        throw std::invalid_argument("integrate_levy_interval: interval must not straddle 0");
    int sign = b > 0.0 ? +1 : -1;
    if (sign < 0 && !model.has_negative_jumps()) return 0.0;

    double lo = std::min(std::abs(a), std::abs(b));
    double hi = std::max(std::abs(a), std::abs(b));
    SideParams sp = side_params(model, sign);
    PlainEval ev{f, class_order(cls)};
    std::vector<Piece<double>> pieces;
    if (lo == 0.0) {
        double edge = std::isfinite(hi) ? std::min(hi, 1.0) : 1.0;
        pieces.push_back(near_piece<double>(sp, ev, class_order(cls), edge));
        if (hi > edge) {
            if (std::isfinite(hi))
                pieces.push_back(plain_piece<double>(sp, PlainEval{f, 0}, 0, edge, hi));
            else
                pieces.push_back(tail_piece<double>(sp, PlainEval{f, 0}, 0, edge));
        }
    } else {
        if (std::isfinite(hi))
            pieces.push_back(plain_piece<double>(sp, PlainEval{f, 0}, 0, lo, hi));
        else
            pieces.push_back(tail_piece<double>(sp, PlainEval{f, 0}, 0, lo));
    }
    return adaptive(pieces, cfg, "integrate_levy_interval");
}

std::complex<double> expm1m_over_z2(std::complex<double> z) {
    if (std::abs(z) > 0.25) return (std::exp(z) - 1.0 - z) / (z * z);
    std::complex<double> term(0.5, 0.0), sum(0.5, 0.0);
    for (int k = 3; k <= 24; ++k) {
        term *= z / static_cast<double>(k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

std::complex<double> expm1_over_z(std::complex<double> z) {
    if (std::abs(z) > 0.25) return (std::exp(z) - 1.0) / z;
    std::complex<double> term(1.0, 0.0), sum(1.0, 0.0);
    for (int k = 2; k <= 24; ++k) {
        term *= z / static_cast<double>(k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

std::complex<double> characteristic_exponent(const LevyModel& model, std::complex<double> u,
                                             const QuadratureConfig& cfg) {
    const std::complex<double> iu(-u.imag(), u.real());
    std::complex<double> psi = iu * model.b - 0.5 * u * u * model.c;
    if (!model.has_jumps()) return psi;

    double w = -u.imag(); // exponential order of |e^{iux}| = e^{wx}
    if (w != 0.0 && !model.exp_moment_domain().contains(w))
        throw DivergenceError(
            "characteristic_exponent: Im(u) outside the exponential-moment strip");

    using V = std::complex<double>;
    // |x| <= 1: e^{iux} - 1 - iux = (iu)^2 x^2 kernel(iux), quadratic class.
    // The evaluator receives lw carrying x^2 * density * jacobian.
    struct NearEval {
        std::complex<double> iu;
        V operator()(double x, double lw) const {
            if (lw < -745.0) return {0.0, 0.0};
            return iu * iu * expm1m_over_z2(iu * x) * std::exp(lw);
        }
    };
    // |x| > 1: e^{iux} - 1, evaluated as exp(iux + lw) - exp(lw) so the
    // exponential tilt and the density decay stay paired.
    struct TailEval {
        std::complex<double> iu;
        V operator()(double x, double lw) const {
            if (lw < -709.0 && lw + (iu * x).real() < -709.0) return {0.0, 0.0};
            return std::exp(iu * x + lw) - std::exp(lw);
        }
    };

    QuadratureConfig c2 = cfg;
    c2.split_points = {-1.0, 0.0, 1.0};
    std::vector<Piece<V>> pieces;
    for (int sign : {+1, -1}) {
        if (sign < 0 && !model.has_negative_jumps()) continue;
        SideParams sp = side_params(model, sign);
        pieces.push_back(near_piece<V>(sp, NearEval{iu}, 2, 1.0));
        pieces.push_back(tail_piece<V>(sp, TailEval{iu}, 0, 1.0));
    }
    return psi + adaptive(pieces, c2, "characteristic_exponent");
}

} // namespace levystab
