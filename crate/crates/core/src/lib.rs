//! Zipf rank-frequency analysis for symbolic music and text.
//!
//! The pipeline reads Standard MIDI Files (or plain text, or pre-tokenized
//! streams), turns them into tokens, builds rank-frequency tables and
//! occurrence spectra, and fits the Simon-model rank law
//!
//! ```text
//! n(r) = 1 / (a + b r)^z,   z = 1/nu,   a = n0^-nu,   b = (1 - a) / V
//! ```
//!
//! with `nu` as the only free parameter. `n0` is tied to the corpus length
//! `T` and lexicon size `V`. A seeded Simon-process simulator generates
//! synthetic corpora for validating the whole chain.
//!
//! Numeric code is generic over [`Real`] so it runs in `f32` or `f64`; the
//! aliases at the crate root pin the `f64` instantiation used by the CLI.

pub mod error;
pub mod freq_stats;
pub mod note_tokenizer;
pub mod report;
pub mod scalar;
pub mod simon_fit;
pub mod simon_sim;
pub mod smf_parser;
pub mod stat_math;
pub mod text_tokenizer;

pub use error::{Error, Result, SmfError};
pub use freq_stats::{count_tokens, spectrum, OccurrenceSpectrum, RankTable};
pub use note_tokenizer::{
    classify_duration, tokenize, DurationClass, DurationGrid, NoteToken, TokenizeOptions,
};
pub use scalar::Real;
pub use simon_fit::{fit_nu, FitOptions, Residuals};
pub use simon_sim::{simulate, SimConfig, SimMode, SimResult};
pub use smf_parser::{pair_notes, parse_smf, RawNote, SmfHeader};
pub use text_tokenizer::{tokenize_text, WordToken};

/// Simon-model fit in double precision.
pub type SimonFit = simon_fit::SimonFit<f64>;
/// Simon-model fit in single precision.
pub type SimonFit32 = simon_fit::SimonFit<f32>;
/// Spectrum exponent estimate in double precision.
pub type GammaEstimate = freq_stats::GammaEstimate<f64>;
/// Log-log regression result in double precision.
pub type LogLogFit = stat_math::LogLogFit<f64>;
/// Root-finding bracket in double precision.
pub type Bracket = stat_math::Bracket<f64>;
/// Simulation verification report in double precision.
pub type ZipfReport = simon_sim::ZipfReport<f64>;
