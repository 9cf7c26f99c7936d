//! Numeric kernels: chi-square tail, log-log least squares, bisection and
//! golden-section search.

use crate::error::{Error, Result};
use crate::scalar::Real;

const GAMMA_MAX_ITER: usize = 10_000;

/// Lanczos approximation (g = 7, 9 terms).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_count(i as u64));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    let half_ln_two_pi = T::lit(0.918_938_533_204_672_7);
    half_ln_two_pi + (x + half) * t.ln() - t + acc.ln()
}

/// `exp(-x + a ln x - ln Γ(a))`, the common prefactor of both expansions.
fn gamma_prefactor<T: Real>(a: T, x: T) -> T {
    (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized lower incomplete gamma `P(a, x)` by its power series.
pub fn gamma_p_series<T: Real>(a: T, x: T) -> Result<T> {
    if x == T::zero() {
        return Ok(T::zero());
    }
    let eps = T::epsilon();
    let mut ap = a;
    let mut term = T::one() / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap = ap + T::one();
        term = term * x / ap;
        sum = sum + term;
        if term.abs() < sum.abs() * eps {
            return Ok(sum * gamma_prefactor(a, x));
        }
    }
    Err(Error::NonConvergence {
        iterations: GAMMA_MAX_ITER,
    })
}

/// Regularized upper incomplete gamma `Q(a, x)` by its continued fraction,
/// evaluated with the modified Lentz method.
pub fn gamma_q_continued_fraction<T: Real>(a: T, x: T) -> Result<T> {
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let guard = |v: T| if v.abs() < tiny { tiny } else { v };

    let two = T::lit(2.0);
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / guard(b);
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let i = T::from_count(i as u64);
        let an = -i * (i - a);
        b = b + two;
        d = T::one() / guard(an * d + b);
        c = guard(b + an / c);
        let delta = d * c;
        h = h * delta;
        if (delta - T::one()).abs() < eps {
            return Ok(gamma_prefactor(a, x) * h);
        }
    }
    Err(Error::NonConvergence {
        iterations: GAMMA_MAX_ITER,
    })
}

/// Upper-tail probability of the chi-square distribution with `dof`
/// degrees of freedom, `Q(dof/2, x/2)`.
///
/// The power series is used for `x < dof + 1`, the continued fraction
/// otherwise.
pub fn chi_square_sf<T: Real>(x: T, dof: u64) -> Result<T> {
    if dof == 0 {
        return Err(Error::Domain("chi-square needs dof >= 1".into()));
    }
    if x.is_nan() || x < T::zero() {
        return Err(Error::Domain(format!("chi-square statistic {x} < 0")));
    }
    if x == T::zero() {
        return Ok(T::one());
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    let k = T::from_count(dof);
    let a = k / T::lit(2.0);
    let half_x = x / T::lit(2.0);
    let q = if x < k + T::one() {
        T::one() - gamma_p_series(a, half_x)?
    } else {
        gamma_q_continued_fraction(a, half_x)?
    };
    Ok(q.max(T::zero()).min(T::one()))
}

/// Interval with function values of opposite sign at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

impl<T: Real> Bracket<T> {
    pub fn new(lo: T, hi: T, f_lo: T, f_hi: T) -> Result<Self> {
        let opposite = (f_lo < T::zero() && f_hi > T::zero())
            || (f_lo > T::zero() && f_hi < T::zero())
            || f_lo == T::zero()
            || f_hi == T::zero();
        let ordered = lo.partial_cmp(&hi) == Some(std::cmp::Ordering::Less);
        if !ordered || !opposite {
            return Err(Error::BracketInvalid {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Bracket { lo, hi, f_lo, f_hi })
    }

    /// Evaluates `f` at both ends and validates the sign change.
    pub fn around<F: FnMut(T) -> T>(lo: T, hi: T, mut f: F) -> Result<Self> {
        let f_lo = f(lo);
        let f_hi = f(hi);
        Self::new(lo, hi, f_lo, f_hi)
    }
}

pub const BISECT_MAX_ITER: usize = 200;

/// Bisection on a sign-changing bracket. Stops once the bracket width is at
/// most `rel_tol * |root|`, or when the interval can no longer be split.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, bracket: Bracket<T>, rel_tol: T) -> Result<T> {
    let Bracket {
        mut lo,
        mut hi,
        f_lo,
        f_hi,
    } = bracket;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    let lo_negative = f_lo < T::zero();
    let two = T::lit(2.0);
    for _ in 0..BISECT_MAX_ITER {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm < T::zero()) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * mid.abs() {
            return Ok(lo + (hi - lo) / two);
        }
    }
    Err(Error::NonConvergence {
        iterations: BISECT_MAX_ITER,
    })
}

/// Golden-section search for a minimum of `g` on `[lo, hi]`.
///
/// Returns the midpoint of the final interval, whose width is at most
/// `x_tol`. Only points inside `[lo, hi]` are evaluated.
pub fn golden_minimize<T: Real, G: FnMut(T) -> T>(mut g: G, lo: T, hi: T, x_tol: T) -> T {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    while b - a > x_tol {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
        if c >= d {
            // interval collapsed below float resolution
            break;
        }
    }
    a + (b - a) / T::lit(2.0)
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Standard error of the slope; zero for an exact fit.
    pub stderr: T,
    pub points: usize,
}

/// Straight-line least squares on `(x, y)` pairs.
pub fn linear_ols<T: Real>(points: &[(T, T)]) -> Result<LogLogFit<T>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InsufficientSupport { needed: 3, got: n });
    }
    let nf = T::from_count(n as u64);
    let (sx, sy) = points
        .iter()
        .fold((T::zero(), T::zero()), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (mx, my) = (sx / nf, sy / nf);
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for &(x, y) in points {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx <= T::zero() {
        return Err(Error::Domain("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = points.iter().fold(T::zero(), |acc, &(x, y)| {
        let e = y - (intercept + slope * x);
        acc + e * e
    });
    let dof = T::from_count(n as u64 - 2);
    let stderr = (ssr / dof / sxx).sqrt();
    Ok(LogLogFit {
        slope,
        intercept,
        stderr,
        points: n,
    })
}

/// Least squares on `(ln x, ln y)`.
pub fn loglog_ols<T: Real>(points: &[(T, T)]) -> Result<LogLogFit<T>> {
    if points.len() < 3 {
        return Err(Error::InsufficientSupport {
            needed: 3,
            got: points.len(),
        });
    }
    let logged = points
        .iter()
        .map(|&(x, y)| {
            if x > T::zero() && y > T::zero() {
                Ok((x.ln(), y.ln()))
            } else {
                Err(Error::Domain(format!(
                    "log-log regression needs positive coordinates, got ({x}, {y})"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    linear_ols(&logged)
}
