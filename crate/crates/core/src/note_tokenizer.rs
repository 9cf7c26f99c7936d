//! Note tokens: MIDI key number plus a quantized duration class.
//!
//! Durations are measured in quarter notes (`ticks / division`) and snapped
//! to the nearest entry of a [`DurationGrid`] in log space, so a note held
//! 1.45 beats reads as a dotted quarter and not a quarter. Volume, channel
//! and timbre never enter a token's identity.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::smf_parser::RawNote;

/// Exact note length in quarter notes.
pub type QuarterRatio = Ratio<u32>;

/// One symbolic note type of the grid.
#[derive(Debug, Clone, Serialize)]
pub struct DurationClass {
    pub label: String,
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: QuarterRatio,
}

fn ser_ratio<S: serde::Serializer>(r: &QuarterRatio, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

// Identity is the ratio alone; labels are in bijection with ratios.
impl PartialEq for DurationClass {
    fn eq(&self, other: &Self) -> bool {
        self.ratio == other.ratio
    }
}
impl Eq for DurationClass {}
impl Hash for DurationClass {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ratio.hash(state);
    }
}
impl PartialOrd for DurationClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for DurationClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio.cmp(&other.ratio)
    }
}

const STANDARD_GRID: [(u32, u32, &str); 17] = [
    (1, 16, "sixty-fourth"),
    (1, 12, "thirty-second-triplet"),
    (1, 8, "thirty-second"),
    (3, 16, "dotted-thirty-second"),
    (1, 6, "sixteenth-triplet"),
    (1, 4, "sixteenth"),
    (1, 3, "eighth-triplet"),
    (3, 8, "dotted-sixteenth"),
    (1, 2, "eighth"),
    (3, 4, "dotted-eighth"),
    (1, 1, "quarter"),
    (3, 2, "dotted-quarter"),
    (2, 1, "half"),
    (3, 1, "dotted-half"),
    (4, 1, "whole"),
    (6, 1, "dotted-whole"),
    (8, 1, "double-whole"),
];

/// Sorted, duplicate-free set of duration classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DurationGrid {
    classes: Vec<DurationClass>,
}

impl Default for DurationGrid {
    /// Double-whole down to sixty-fourth, with dotted and triplet values.
    fn default() -> Self {
        let classes = STANDARD_GRID
            .iter()
            .map(|&(n, d, label)| DurationClass {
                label: label.to_string(),
                ratio: Ratio::new(n, d),
            })
            .collect();
        DurationGrid { classes }
    }
}

impl DurationGrid {
    pub fn new(mut classes: Vec<DurationClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if classes.iter().any(|c| *c.ratio.numer() == 0) {
            return Err(Error::InvalidGrid("ratios must be positive".into()));
        }
        classes.sort();
        if classes.windows(2).any(|w| w[0].ratio == w[1].ratio) {
            return Err(Error::InvalidGrid("duplicate ratio".into()));
        }
        Ok(DurationGrid { classes })
    }

    /// Ascending by ratio.
    pub fn classes(&self) -> &[DurationClass] {
        &self.classes
    }

    /// Label of the class with this exact ratio, if any.
    pub fn label_of(&self, ratio: QuarterRatio) -> Option<&str> {
        self.classes
            .binary_search_by(|c| c.ratio.cmp(&ratio))
            .ok()
            .map(|i| self.classes[i].label.as_str())
    }
}

/// Grid file: one rational per line (`3/2`, `1`, `1/12`); blank lines and
/// `#` comments are skipped. Ratios that appear in the standard grid keep
/// their standard names, anything else is labelled by its ratio.
impl FromStr for DurationGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let standard = DurationGrid::default();
        let mut classes = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ratio: QuarterRatio = line.parse().map_err(|_| {
                Error::InvalidGrid(format!("line {}: cannot parse {line:?}", lineno + 1))
            })?;
            let label = standard
                .label_of(ratio)
                .map(str::to_string)
                .unwrap_or_else(|| ratio.to_string());
            classes.push(DurationClass { label, ratio });
        }
        DurationGrid::new(classes)
    }
}

/// Outcome of snapping one duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classified {
    /// Index into [`DurationGrid::classes`].
    pub index: usize,
    /// The duration fell outside the grid's range and was clamped.
    pub clamped: bool,
}

/// Snaps `duration / division` (quarter notes) to the grid entry nearest in
/// log space; an exact geometric-mean tie goes to the shorter class.
///
/// The comparison is done in integers: between neighbours `r1 < r2`, the
/// value `x` is closer to `r1` iff `x^2 < r1 * r2`.
pub fn classify_duration(duration: u64, division: u64, grid: &DurationGrid) -> Classified {
    debug_assert!(duration >= 1 && division >= 1);
    let classes = grid.classes();
    let x = |r: &QuarterRatio| (u128::from(*r.numer()), u128::from(*r.denom()));
    let (d, q) = (u128::from(duration), u128::from(division));
    // x <=> r  as  d * rd  <=>  rn * q
    let cmp_to = |r: &QuarterRatio| {
        let (rn, rd) = x(r);
        (d * rd).cmp(&(rn * q))
    };
    let first = &classes[0].ratio;
    let last = &classes[classes.len() - 1].ratio;
    if cmp_to(first) != Ordering::Greater {
        return Classified {
            index: 0,
            clamped: cmp_to(first) == Ordering::Less,
        };
    }
    if cmp_to(last) != Ordering::Less {
        return Classified {
            index: classes.len() - 1,
            clamped: cmp_to(last) == Ordering::Greater,
        };
    }
    // first index whose ratio is >= x
    let upper = classes.partition_point(|c| cmp_to(&c.ratio) == Ordering::Greater);
    if cmp_to(&classes[upper].ratio) == Ordering::Equal {
        return Classified {
            index: upper,
            clamped: false,
        };
    }
    let (n1, d1) = x(&classes[upper - 1].ratio);
    let (n2, d2) = x(&classes[upper].ratio);
    // x^2 = d^2/q^2 versus n1 n2 / (d1 d2); the u128 products hold for u32
    // ratios and durations below 2^32 ticks, saturating beyond.
    let lhs = (d * d).saturating_mul(d1 * d2);
    let rhs = (n1 * n2).saturating_mul(q * q);
    let index = if lhs <= rhs { upper - 1 } else { upper };
    Classified {
        index,
        clamped: false,
    }
}

/// A note as a lexicon entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NoteToken {
    pub pitch: u8,
    pub duration_class: DurationClass,
}

impl fmt::Display for NoteToken {
    /// `<key>:<ratio>`, e.g. `60:3/2` for a dotted-quarter middle C.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.pitch, self.duration_class.ratio)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TokenizeOptions {
    /// Notes shorter than this many ticks are dropped as grace notes; 0
    /// keeps everything.
    pub min_ticks: u64,
    pub grid: DurationGrid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenized {
    pub tokens: Vec<NoteToken>,
    /// Notes removed by the `min_ticks` filter.
    pub dropped: usize,
    /// Durations outside the grid's range.
    pub clamped: usize,
}

/// Converts notes to tokens in onset order (ties by track, channel, pitch).
pub fn tokenize(notes: &[RawNote], division: u16, opts: &TokenizeOptions) -> Result<Tokenized> {
    let mut ordered: Vec<&RawNote> = notes.iter().collect();
    ordered.sort_by_key(|n| (n.onset, n.track, n.channel, n.pitch));

    let mut dropped = 0;
    let mut clamped = 0;
    let mut tokens = Vec::with_capacity(ordered.len());
    for n in ordered {
        if n.duration < opts.min_ticks {
            dropped += 1;
            continue;
        }
        let c = classify_duration(n.duration, u64::from(division), &opts.grid);
        clamped += usize::from(c.clamped);
        tokens.push(NoteToken {
            pitch: n.pitch,
            duration_class: opts.grid.classes()[c.index].clone(),
        });
    }
    if tokens.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Tokenized {
        tokens,
        dropped,
        clamped,
    })
}
