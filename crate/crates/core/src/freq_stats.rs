//! Rank-frequency tables and occurrence spectra.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::hash::Hash;
use std::io::Write;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stat_math::{loglog_ols, LogLogFit};

/// Distinct tokens with their counts, most frequent first.
///
/// Equal counts are ordered by the token's own `Ord`, so the table depends
/// only on the multiset of tokens and not on their order of appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable<K> {
    entries: Vec<(K, u64)>,
    total: u64,
}

impl<K: Ord> RankTable<K> {
    /// Builds a table from `(token, count)` pairs. Pairs with a zero count
    /// are discarded; duplicate tokens are not merged.
    pub fn from_counts(pairs: impl IntoIterator<Item = (K, u64)>) -> Result<Self> {
        let mut entries: Vec<(K, u64)> = pairs.into_iter().filter(|(_, c)| *c > 0).collect();
        if entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let total = entries.iter().map(|(_, c)| c).sum();
        Ok(RankTable { entries, total })
    }
}

impl<K> RankTable<K> {
    /// Lexicon size `V`.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// Corpus length `T`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn entries(&self) -> &[(K, u64)] {
        &self.entries
    }

    /// Counts in rank order; element `r - 1` is `n(r)`.
    pub fn counts(&self) -> Vec<u64> {
        self.entries.iter().map(|(_, c)| *c).collect()
    }

    /// `n(r)` for `1 <= r <= V`.
    pub fn count_at(&self, rank: usize) -> Option<u64> {
        rank.checked_sub(1)
            .and_then(|i| self.entries.get(i))
            .map(|(_, c)| *c)
    }

    pub fn map_tokens<J, F: FnMut(&K) -> J>(&self, mut f: F) -> RankTable<J> {
        RankTable {
            entries: self.entries.iter().map(|(k, c)| (f(k), *c)).collect(),
            total: self.total,
        }
    }
}

impl<K: Display> RankTable<K> {
    /// CSV with header `rank,count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "count"])?;
        for (i, (_, c)) in self.entries.iter().enumerate() {
            w.write_record([(i + 1).to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct RankRow {
    rank: usize,
    token: String,
    count: u64,
}

/// JSON form: `{"distinct": V, "total": T, "ranks": [{"rank", "token", "count"}]}`.
impl<K: Display> Serialize for RankTable<K> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let rows: Vec<RankRow> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, (k, c))| RankRow {
                rank: i + 1,
                token: k.to_string(),
                count: *c,
            })
            .collect();
        let mut st = s.serialize_struct("RankTable", 3)?;
        st.serialize_field("distinct", &self.entries.len())?;
        st.serialize_field("total", &self.total)?;
        st.serialize_field("ranks", &rows)?;
        st.end()
    }
}

/// Counts tokens and ranks them.
pub fn count_tokens<K, I>(tokens: I) -> Result<RankTable<K>>
where
    K: Ord + Hash,
    I: IntoIterator<Item = K>,
{
    let mut counts: HashMap<K, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t).or_insert(0) += 1;
    }
    RankTable::from_counts(counts)
}

/// `w(n)`: how many distinct tokens occur exactly `n` times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct OccurrenceSpectrum {
    pairs: BTreeMap<u64, u64>,
}

impl OccurrenceSpectrum {
    /// `(n, w(n))` pairs with `w(n) > 0`, ascending in `n`.
    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.pairs.iter().map(|(&n, &w)| (n, w))
    }

    pub fn w(&self, n: u64) -> u64 {
        self.pairs.get(&n).copied().unwrap_or(0)
    }

    /// Σ w(n), which equals V.
    pub fn distinct(&self) -> u64 {
        self.pairs.values().sum()
    }

    /// Σ n·w(n), which equals T.
    pub fn total(&self) -> u64 {
        self.pairs.iter().map(|(n, w)| n * w).sum()
    }

    /// CSV with header `n,w`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "w"])?;
        for (n, c) in self.pairs() {
            w.write_record([n.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn spectrum<K>(table: &RankTable<K>) -> OccurrenceSpectrum {
    let mut pairs = BTreeMap::new();
    for (_, c) in table.entries() {
        *pairs.entry(*c).or_insert(0) += 1;
    }
    OccurrenceSpectrum { pairs }
}

/// Estimated exponent of `w(n) ~ n^-gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaEstimate<T> {
    pub gamma: T,
    pub stderr: T,
    /// Number of `(n, w)` points in the regression.
    pub support: usize,
}

impl<T: Real> GammaEstimate<T> {
    fn from_fit(fit: LogLogFit<T>, offset: T) -> Self {
        GammaEstimate {
            gamma: offset - fit.slope,
            stderr: fit.stderr,
            support: fit.points,
        }
    }
}

/// Default upper end of the spectrum fitting window.
pub const DEFAULT_N_MAX: u64 = 50;

/// Least-squares slope of `ln w(n)` against `ln n` over the nonzero bins
/// with `n <= n_max`, negated.
pub fn fit_spectrum_gamma<T: Real>(
    spec: &OccurrenceSpectrum,
    n_max: u64,
) -> Result<GammaEstimate<T>> {
    let points: Vec<(T, T)> = spec
        .pairs()
        .take_while(|&(n, _)| n <= n_max)
        .map(|(n, w)| (T::from_count(n), T::from_count(w)))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientSupport {
            needed: 3,
            got: points.len(),
        });
    }
    Ok(GammaEstimate::from_fit(loglog_ols(&points)?, T::zero()))
}

/// Spectrum exponent from the cumulative spectrum `W(n) = Σ_{m>=n} w(m)`,
/// which behaves as `n^(1-gamma)`. Fitted over `1 <= n <= n_max` where
/// `W(n) > 0`.
///
/// `W(n)` has no empty bins below the largest count, so this stays usable
/// for small lexicons whose `w(n)` is mostly zeros inside the window.
pub fn fit_cumulative_gamma<T: Real>(
    spec: &OccurrenceSpectrum,
    n_max: u64,
) -> Result<GammaEstimate<T>> {
    let mut above: u64 = spec.distinct();
    let mut points = Vec::new();
    let mut bins = spec.pairs().peekable();
    for n in 1..=n_max {
        if above == 0 {
            break;
        }
        points.push((T::from_count(n), T::from_count(above)));
        if let Some(&(m, w)) = bins.peek() {
            if m == n {
                above -= w;
                bins.next();
            }
        }
    }
    if points.len() < 3 {
        return Err(Error::InsufficientSupport {
            needed: 3,
            got: points.len(),
        });
    }
    Ok(GammaEstimate::from_fit(loglog_ols(&points)?, T::one()))
}

/// Exponent `z` of `n(r) ~ r^-z` in the large-rank regime: log-log least
/// squares over ranks `r_min..=r_last`, where `r_last` is the last rank whose
/// count is at least `min_count`.
pub fn rank_slope<T: Real, K>(
    table: &RankTable<K>,
    r_min: usize,
    min_count: u64,
) -> Result<LogLogFit<T>> {
    let points: Vec<(T, T)> = table
        .entries()
        .iter()
        .enumerate()
        .map(|(i, (_, c))| (i + 1, *c))
        .skip(r_min.saturating_sub(1))
        .take_while(|&(_, c)| c >= min_count)
        .map(|(r, c)| (T::from_count(r as u64), T::from_count(c)))
        .collect();
    let mut fit = loglog_ols(&points)?;
    fit.slope = -fit.slope;
    Ok(fit)
}
