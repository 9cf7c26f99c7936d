//! One-parameter fit of the Simon-model rank law.
//!
//! For a vocabulary growing as `V ~ T^nu` with an occurrence ceiling `n0`,
//! counts fall off with rank as
//!
//! ```text
//! n(r) = (a + b r)^(-1/nu),   a = n0^-nu,   b = (1 - a) / V,
//! ```
//!
//! and `n0` is pinned by the corpus through
//!
//! ```text
//! T / V = nu (n0^(1-nu) - 1) / ((1 - nu) (1 - n0^-nu)).
//! ```
//!
//! Given a rank table, `T` and `V` are known, so each trial `nu` determines
//! `n0`, `a` and `b`; only `nu` is searched.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::freq_stats::RankTable;
use crate::scalar::Real;
use crate::stat_math::{bisect, chi_square_sf, golden_minimize, Bracket};

/// Below this distance from 1 the `T/V` relation switches to its `nu -> 1`
/// limit `ln(n0) / (1 - 1/n0)`.
pub const NU_ONE_SWITCH: f64 = 1e-6;

/// `T/V` as a function of `n0` and `nu`.
///
/// Written with `exp_m1` so it stays accurate for `n0` just above 1, where
/// both numerator and denominator vanish.
pub fn tv_ratio<T: Real>(n0: T, nu: T) -> T {
    let one = T::one();
    let ln_n0 = n0.ln();
    let eps = one - nu;
    if eps.abs() < T::lit(NU_ONE_SWITCH) {
        // ln(n0) / (1 - 1/n0) at nu = 1, plus the first-order term in 1 - nu
        // so the two branches meet without a visible step.
        let limit = ln_n0 / -(-ln_n0).exp_m1();
        let half = T::lit(0.5);
        let slope = if ln_n0 > T::zero() {
            ln_n0 * half - one + ln_n0 / ln_n0.exp_m1()
        } else {
            T::zero()
        };
        return limit * (one + eps * slope);
    }
    let num = nu * ((one - nu) * ln_n0).exp_m1();
    let den = (one - nu) * -(-nu * ln_n0).exp_m1();
    num / den
}

/// Solves the `T/V` relation for `n0 > 1`.
///
/// The relation is increasing in `n0` and tends to 1 as `n0 -> 1+`, so a
/// root exists iff `T > V`. The upper end of the bracket is found by
/// doubling; the root is then bisected to a relative width of about `1e-13`
/// (in `f64`).
pub fn solve_n0<T: Real>(total: u64, distinct: u64, nu: T) -> Result<T> {
    if distinct == 0 || !(nu > T::zero() && nu < T::one()) {
        return Err(Error::Domain(format!(
            "solve_n0 needs V >= 1 and 0 < nu < 1 (V = {distinct}, nu = {nu})"
        )));
    }
    let target = T::from_count(total) / T::from_count(distinct);
    if total <= distinct {
        return Err(Error::NoRoot {
            ratio: target.to_f64().unwrap_or(f64::NAN),
        });
    }
    let f = |n0: T| tv_ratio(n0, nu) - target;

    // As n0 -> 1+ the relation tends to 1 < target.
    let lo = T::one();
    let mut hi = T::lit(2.0);
    let mut f_hi = f(hi);
    while f_hi < T::zero() {
        hi = hi * T::lit(2.0);
        if hi.is_infinite() {
            return Err(Error::NoRoot {
                ratio: target.to_f64().unwrap_or(f64::NAN),
            });
        }
        f_hi = f(hi);
    }
    let bracket = Bracket::new(lo, hi, T::one() - target, f_hi)?;
    bisect(f, bracket, T::attainable(1e-13, 4.0))
}

/// `a = n0^-nu` and `b = (1 - a) / V`; `a + b V = 1` by construction.
pub fn coefficients<T: Real>(n0: T, distinct: u64, nu: T) -> (T, T) {
    let a = (-nu * n0.ln()).exp();
    let b = (T::one() - a) / T::from_count(distinct);
    (a, b)
}

/// How residuals enter the least-squares objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Residuals {
    /// `ln n_obs - ln n_pred`, matching the double-log view of rank plots.
    #[default]
    Log,
    /// `n_obs - n_pred`; dominated by the top few ranks.
    Linear,
}

impl std::str::FromStr for Residuals {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Residuals::Log),
            "linear" => Ok(Residuals::Linear),
            other => Err(Error::Domain(format!("unknown residual kind {other:?}"))),
        }
    }
}

/// Degrees of freedom for the chi-square test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DofConvention {
    /// `V - 2`: one fitted exponent plus the constraint through `T`.
    #[default]
    FitAndTotal,
    /// `V - 1`: the fitted exponent only.
    FitOnly,
}

impl DofConvention {
    pub fn dof(self, distinct: usize) -> u64 {
        let lost = match self {
            DofConvention::FitAndTotal => 2,
            DofConvention::FitOnly => 1,
        };
        (distinct as u64).saturating_sub(lost).max(1)
    }
}

impl std::str::FromStr for DofConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v-2" | "V-2" => Ok(DofConvention::FitAndTotal),
            "v-1" | "V-1" => Ok(DofConvention::FitOnly),
            other => Err(Error::Domain(format!("unknown dof convention {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    pub residuals: Residuals,
    pub dof: DofConvention,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Spacing of the coarse scan.
    pub grid_step: f64,
    /// Final golden-section bracket width.
    pub nu_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            residuals: Residuals::Log,
            dof: DofConvention::FitAndTotal,
            nu_min: 0.02,
            nu_max: 0.98,
            grid_step: 0.01,
            nu_tol: 1e-5,
        }
    }
}

/// The rank law for fixed `(T, V, nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankLaw<T> {
    pub nu: T,
    pub z: T,
    pub n0: T,
    pub a: T,
    pub b: T,
    pub distinct: u64,
    pub total: u64,
}

impl<T: Real> RankLaw<T> {
    pub fn new(total: u64, distinct: u64, nu: T) -> Result<Self> {
        let n0 = solve_n0(total, distinct, nu)?;
        Ok(Self::from_n0(n0, total, distinct, nu))
    }

    /// Builds the law from an explicit `n0` (used for forward generation).
    pub fn from_n0(n0: T, total: u64, distinct: u64, nu: T) -> Self {
        let (a, b) = coefficients(n0, distinct, nu);
        RankLaw {
            nu,
            z: T::one() / nu,
            n0,
            a,
            b,
            distinct,
            total,
        }
    }

    /// `(a + b r)^-z` for real rank `0 <= r <= V`.
    pub fn predict(&self, rank: T) -> T {
        (-self.z * (self.a + self.b * rank).ln()).exp()
    }

    fn objective(&self, counts: &[u64], residuals: Residuals) -> T {
        counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let pred = self.predict(T::from_count(i as u64 + 1));
                let obs = T::from_count(c);
                let e = match residuals {
                    Residuals::Log => obs.ln() - pred.ln(),
                    Residuals::Linear => obs - pred,
                };
                e * e
            })
            .fold(T::zero(), |acc, e| acc + e)
    }
}

/// Fitted model plus goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimonFit<T> {
    pub nu: T,
    pub z: T,
    pub n0: T,
    pub a: T,
    pub b: T,
    pub sse_log: T,
    pub chi2: T,
    pub dof: u64,
    pub p_value: T,
    /// The optimum sits at an edge of the search range.
    pub boundary_warning: bool,
    #[serde(skip)]
    pub distinct: u64,
    #[serde(skip)]
    pub total: u64,
    #[serde(skip)]
    pub residuals: Residuals,
}

impl<T: Real> SimonFit<T> {
    pub fn law(&self) -> RankLaw<T> {
        RankLaw {
            nu: self.nu,
            z: self.z,
            n0: self.n0,
            a: self.a,
            b: self.b,
            distinct: self.distinct,
            total: self.total,
        }
    }
}

/// Predicted count at rank `r` under a fitted model.
pub fn predict_n<T: Real>(rank: T, fit: &SimonFit<T>) -> T {
    fit.law().predict(rank)
}

fn check_fittable(counts: &[u64]) -> Result<(u64, u64)> {
    let distinct = counts.len() as u64;
    if counts.first() == counts.last() {
        return Err(Error::DegenerateTable);
    }
    if distinct < 3 {
        return Err(Error::InsufficientSupport {
            needed: 3,
            got: counts.len(),
        });
    }
    Ok((counts.iter().sum(), distinct))
}

/// Sum of squared residuals at `nu`, with `n0`, `a`, `b` recomputed from the
/// table's `T` and `V`.
pub fn fit_objective<T: Real>(counts: &[u64], nu: T, residuals: Residuals) -> Result<T> {
    let (total, distinct) = check_fittable(counts)?;
    Ok(RankLaw::new(total, distinct, nu)?.objective(counts, residuals))
}

/// Objective on the coarse scan grid, as `(nu, value)` pairs.
pub fn scan_objective<T: Real>(counts: &[u64], opts: &FitOptions) -> Result<Vec<(T, T)>> {
    let (total, distinct) = check_fittable(counts)?;
    let steps = ((opts.nu_max - opts.nu_min) / opts.grid_step + 1e-9).floor() as u64;
    (0..=steps)
        .map(|k| {
            let nu = T::lit(opts.nu_min + k as f64 * opts.grid_step);
            let law = RankLaw::new(total, distinct, nu)?;
            Ok((nu, law.objective(counts, opts.residuals)))
        })
        .collect()
}

/// Fits `nu` to counts given in rank order (non-increasing).
///
/// Coarse scan over `[nu_min, nu_max]`, then golden-section refinement
/// between the neighbours of the best grid point.
pub fn fit_counts<T: Real>(counts: &[u64], opts: &FitOptions) -> Result<SimonFit<T>> {
    let (total, distinct) = check_fittable(counts)?;
    let scan = scan_objective::<T>(counts, opts)?;
    let best = scan
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1 .1
                .partial_cmp(&b.1 .1)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .expect("scan grid is never empty");
    let lo = scan[best.saturating_sub(1)].0;
    let hi = scan[(best + 1).min(scan.len() - 1)].0;

    // n0 cannot fail here: the same (T, V) already solved on the grid.
    let objective = |nu: T| {
        RankLaw::new(total, distinct, nu)
            .map(|law| law.objective(counts, opts.residuals))
            .unwrap_or_else(|_| T::infinity())
    };
    let nu = golden_minimize(objective, lo, hi, T::lit(opts.nu_tol));
    let law = RankLaw::new(total, distinct, nu)?;
    let edge = T::lit(opts.grid_step / 2.0);
    let boundary_warning = nu - T::lit(opts.nu_min) < edge || T::lit(opts.nu_max) - nu < edge;

    let mut fit = SimonFit {
        nu,
        z: law.z,
        n0: law.n0,
        a: law.a,
        b: law.b,
        sse_log: law.objective(counts, Residuals::Log),
        chi2: T::zero(),
        dof: 0,
        p_value: T::zero(),
        boundary_warning,
        distinct,
        total,
        residuals: opts.residuals,
    };
    let (chi2, dof, p_value) = chi_square_counts(counts, &fit, opts.dof)?;
    fit.chi2 = chi2;
    fit.dof = dof;
    fit.p_value = p_value;
    Ok(fit)
}

/// Fits `nu` to a rank table with default options.
pub fn fit_nu<K, T: Real>(table: &RankTable<K>) -> Result<SimonFit<T>> {
    fit_counts(&table.counts(), &FitOptions::default())
}

/// `chi2 = Σ (n_obs - n_pred)^2 / n_pred`, with `observed[r - 1]` at rank
/// `r`.
pub fn chi_square_observed<T: Real>(
    observed: &[T],
    law: &RankLaw<T>,
    dof: DofConvention,
) -> Result<(T, u64, T)> {
    let chi2 = observed
        .iter()
        .enumerate()
        .map(|(i, &obs)| {
            let pred = law.predict(T::from_count(i as u64 + 1));
            let d = obs - pred;
            d * d / pred
        })
        .fold(T::zero(), |acc, x| acc + x);
    let dof = dof.dof(observed.len());
    let p = chi_square_sf(chi2, dof)?;
    Ok((chi2, dof, p))
}

pub fn chi_square_counts<T: Real>(
    counts: &[u64],
    fit: &SimonFit<T>,
    dof: DofConvention,
) -> Result<(T, u64, T)> {
    let observed: Vec<T> = counts.iter().map(|&c| T::from_count(c)).collect();
    chi_square_observed(&observed, &fit.law(), dof)
}

/// Chi-square goodness of fit of `fit` against `table`.
pub fn chi_square_gof<K, T: Real>(
    table: &RankTable<K>,
    fit: &SimonFit<T>,
    dof: DofConvention,
) -> Result<(T, u64, T)> {
    chi_square_counts(&table.counts(), fit, dof)
}

/// Counts generated from the rank law at integer ranks `1..=V`, rounded to
/// the nearest integer and floored at 1.
pub fn forward_counts<T: Real>(nu: T, n0: T, distinct: u64) -> Vec<u64> {
    // T does not enter predict(), only a and b do
    let law = RankLaw::from_n0(n0, 0, distinct, nu);
    (1..=distinct)
        .map(|r| {
            let c = law.predict(T::from_count(r)).round();
            c.to_u64().unwrap_or(u64::MAX).max(1)
        })
        .collect()
}
