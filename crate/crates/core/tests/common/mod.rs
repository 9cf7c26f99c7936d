#![allow(dead_code)]

use notezipf::note_tokenizer::{tokenize, TokenizeOptions};
use notezipf::{pair_notes, parse_smf, SmfError};

/// Standard MIDI variable-length quantity.
pub fn vlq(mut v: u32) -> Vec<u8> {
    let mut out = vec![(v & 0x7f) as u8];
    v >>= 7;
    while v > 0 {
        out.push((v & 0x7f) as u8 | 0x80);
        v >>= 7;
    }
    out.reverse();
    out
}

pub fn chunk(tag: &[u8; 4], body: &[u8]) -> Vec<u8> {
    let mut out = tag.to_vec();
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(body);
    out
}

pub fn header(format: u16, tracks: u16, division: u16) -> Vec<u8> {
    let mut body = format.to_be_bytes().to_vec();
    body.extend_from_slice(&tracks.to_be_bytes());
    body.extend_from_slice(&division.to_be_bytes());
    chunk(b"MThd", &body)
}

/// Track body builder. Each event method takes the delta time before it.
#[derive(Default, Clone)]
pub struct Track(pub Vec<u8>);

impl Track {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn event(mut self, delta: u32, bytes: &[u8]) -> Self {
        self.0.extend(vlq(delta));
        self.0.extend_from_slice(bytes);
        self
    }

    pub fn on(self, delta: u32, ch: u8, key: u8, vel: u8) -> Self {
        self.event(delta, &[0x90 | ch, key, vel])
    }

    pub fn off(self, delta: u32, ch: u8, key: u8) -> Self {
        self.event(delta, &[0x80 | ch, key, 0x40])
    }

    /// Data bytes only; relies on running status.
    pub fn run(self, delta: u32, key: u8, vel: u8) -> Self {
        self.event(delta, &[key, vel])
    }

    pub fn meta(self, delta: u32, kind: u8, data: &[u8]) -> Self {
        let mut ev = vec![0xff, kind];
        ev.extend(vlq(data.len() as u32));
        ev.extend_from_slice(data);
        self.event(delta, &ev)
    }

    pub fn sysex(self, delta: u32, data: &[u8]) -> Self {
        let mut ev = vec![0xf0];
        ev.extend(vlq(data.len() as u32));
        ev.extend_from_slice(data);
        self.event(delta, &ev)
    }

    pub fn end(self, delta: u32) -> Self {
        self.meta(delta, 0x2f, &[])
    }

    pub fn chunk(&self) -> Vec<u8> {
        chunk(b"MTrk", &self.0)
    }
}

pub fn smf(format: u16, division: u16, tracks: &[Track]) -> Vec<u8> {
    let mut out = header(format, tracks.len() as u16, division);
    for t in tracks {
        out.extend(t.chunk());
    }
    out
}

/// Offset of the first track body in a file with a 6-byte header.
pub const FIRST_BODY: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub enum Expect {
    /// Token labels `pitch:ratio`, in any order.
    Tokens(Vec<&'static str>),
    Error(SmfError),
}

pub struct Fixture {
    pub name: &'static str,
    pub bytes: Vec<u8>,
    pub expect: Expect,
}

fn ok(name: &'static str, bytes: Vec<u8>, tokens: &[&'static str]) -> Fixture {
    Fixture {
        name,
        bytes,
        expect: Expect::Tokens(tokens.to_vec()),
    }
}

fn err(name: &'static str, bytes: Vec<u8>, e: SmfError) -> Fixture {
    Fixture {
        name,
        bytes,
        expect: Expect::Error(e),
    }
}

/// Hand-assembled conformance files, division 480 unless noted.
pub fn fixtures() -> Vec<Fixture> {
    let mut v = vec![
        ok(
            "single_quarter",
            smf(
                0,
                480,
                &[Track::new().on(0, 0, 60, 100).off(480, 0, 60).end(0)],
            ),
            &["60:1"],
        ),
        // one status byte for all six events; offs are velocity-0 ons
        ok(
            "running_status",
            smf(
                0,
                480,
                &[Track::new()
                    .on(0, 0, 60, 90)
                    .run(0, 64, 90)
                    .run(240, 64, 0)
                    .run(240, 60, 0)
                    .run(0, 67, 80)
                    .run(960, 67, 0)
                    .end(0)],
            ),
            &["60:1", "64:1/2", "67:2"],
        ),
        ok(
            "velocity_zero_off",
            smf(
                0,
                480,
                &[Track::new()
                    .on(0, 3, 72, 64)
                    .on(720, 3, 72, 0)
                    .on(0, 3, 74, 64)
                    .on(160, 3, 74, 0)
                    .end(0)],
            ),
            &["72:3/2", "74:1/3"],
        ),
        // second on before the first off: offs close the oldest open note
        ok(
            "overlapping_same_pitch",
            smf(
                0,
                480,
                &[Track::new()
                    .on(0, 0, 60, 100)
                    .on(240, 0, 60, 100)
                    .off(240, 0, 60)
                    .off(480, 0, 60)
                    .end(0)],
            ),
            &["60:1", "60:3/2"],
        ),
        // same key on two channels pairs independently
        ok(
            "same_key_two_channels",
            smf(
                0,
                96,
                &[Track::new()
                    .on(0, 0, 48, 100)
                    .on(0, 1, 48, 100)
                    .off(48, 1, 48)
                    .off(48, 0, 48)
                    .end(0)],
            ),
            &["48:1", "48:1/2"],
        ),
        ok(
            "format1_multitrack",
            smf(
                1,
                480,
                &[
                    Track::new()
                        .meta(0, 0x51, &[0x07, 0xa1, 0x20])
                        .meta(0, 0x58, &[4, 2, 24, 8])
                        .end(0),
                    Track::new()
                        .on(0, 0, 76, 80)
                        .off(240, 0, 76)
                        .on(0, 0, 74, 80)
                        .off(240, 0, 74)
                        .end(0),
                    Track::new().on(0, 1, 45, 70).off(960, 1, 45).end(0),
                ],
            ),
            &["76:1/2", "74:1/2", "45:2"],
        ),
    ];

    let mut unknown = header(1, 2, 480);
    unknown.extend(Track::new().on(0, 0, 60, 1).off(480, 0, 60).end(0).chunk());
    unknown.extend(chunk(b"XFIH", &[1, 2, 3, 4, 5]));
    unknown.extend(Track::new().on(0, 0, 62, 1).off(120, 0, 62).end(0).chunk());
    v.push(ok("unknown_chunk_skipped", unknown, &["60:1", "62:1/4"]));

    // note still sounding at end of track is closed there
    v.push(ok(
        "unmatched_on_closed_at_end",
        smf(
            0,
            480,
            &[Track::new()
                .on(0, 0, 55, 90)
                .on(0, 0, 57, 90)
                .off(480, 0, 57)
                .end(480)],
        ),
        &["55:2", "57:1"],
    ));

    // sysex, control change, program change and pitch bend are skipped
    v.push(ok(
        "non_note_events",
        smf(
            0,
            480,
            &[Track::new()
                .sysex(0, &[0x7e, 0x7f, 0x09, 0x01, 0xf7])
                .event(0, &[0xb0, 7, 100])
                .event(0, &[0xc0, 5])
                .on(0, 0, 65, 100)
                .event(120, &[0xe0, 0, 0x40])
                .event(0, &[0xd0, 20])
                .off(120, 0, 65)
                .end(0)],
        ),
        &["65:1/2"],
    ));

    // the lost end-of-track is tolerated; notes still close at the last tick
    v.push(ok(
        "missing_end_of_track",
        smf(0, 480, &[Track::new().on(0, 0, 60, 100).off(1440, 0, 60)]),
        &["60:3"],
    ));

    v.push(err(
        "missing_header",
        b"RIFF\0\0\0\x06\0\0\0\x01\x01\xe0".to_vec(),
        SmfError::MissingHeader,
    ));

    let mut smpte = header(0, 1, 0xe728);
    smpte.extend(Track::new().end(0).chunk());
    v.push(err(
        "smpte_division",
        smpte,
        SmfError::SmpteDivision { raw: 0xe728 },
    ));

    v.push(err(
        "zero_division",
        smf(0, 0, &[Track::new().end(0)]),
        SmfError::ZeroDivision,
    ));

    v.push(err(
        "format_3",
        smf(3, 480, &[Track::new().end(0)]),
        SmfError::UnsupportedFormat(3),
    ));

    // track chunk claims 100 bytes; only the 8 written are present
    let mut truncated = header(0, 1, 480);
    let body = Track::new().on(0, 0, 60, 100).off(480, 0, 60).0;
    truncated.extend_from_slice(b"MTrk");
    truncated.extend_from_slice(&100u32.to_be_bytes());
    truncated.extend_from_slice(&body);
    v.push(err(
        "truncated_track_chunk",
        truncated,
        SmfError::TruncatedChunk {
            offset: 14,
            declared: 100,
            available: body.len(),
        },
    ));

    // chunk ends after a note-on's key byte
    v.push(err(
        "truncated_event",
        smf(0, 480, &[Track::new().event(0, &[0x90, 60])]),
        SmfError::TruncatedChunk {
            offset: FIRST_BODY + 3,
            declared: 1,
            available: 0,
        },
    ));

    // a meta event cancels running status
    let dangling = Track::new()
        .on(0, 0, 60, 100)
        .meta(0, 0x01, b"x")
        .run(480, 60, 0)
        .end(0);
    v.push(err(
        "running_status_after_meta",
        smf(0, 480, &[dangling]),
        SmfError::DanglingStatus {
            offset: FIRST_BODY + 4 + 5 + 2,
            byte: 60,
        },
    ));

    v.push(err(
        "data_byte_first",
        smf(0, 480, &[Track::new().run(0, 60, 100).end(0)]),
        SmfError::DanglingStatus {
            offset: FIRST_BODY + 1,
            byte: 60,
        },
    ));

    v.push(err(
        "five_byte_delta",
        smf(
            0,
            480,
            &[Track(vec![0x81, 0x80, 0x80, 0x80, 0x00, 0x90, 60, 1])],
        ),
        SmfError::InvalidVlq { offset: FIRST_BODY },
    ));

    v.push(err(
        "realtime_status_in_track",
        smf(0, 480, &[Track::new().event(0, &[0xf8]).end(0)]),
        SmfError::InvalidStatus {
            offset: FIRST_BODY + 1,
            byte: 0xf8,
        },
    ));

    v
}

/// Parse → pair → tokenize with default options.
pub fn run_fixture(bytes: &[u8]) -> Result<Vec<String>, SmfError> {
    let smf = parse_smf(bytes)?;
    let (notes, _) = pair_notes(&smf.tracks);
    let out = tokenize(&notes, smf.header.division, &TokenizeOptions::default())
        .expect("fixture has notes");
    let mut labels: Vec<String> = out.tokens.iter().map(|t| t.to_string()).collect();
    labels.sort();
    Ok(labels)
}

/// `None` on success, otherwise what went wrong.
pub fn check_fixture(f: &Fixture) -> Option<String> {
    let got = run_fixture(&f.bytes);
    match (&f.expect, got) {
        (Expect::Tokens(want), Ok(got)) => {
            let mut want: Vec<String> = want.iter().map(|s| s.to_string()).collect();
            want.sort();
            (want != got).then(|| format!("{}: expected {want:?}, got {got:?}", f.name))
        }
        (Expect::Error(want), Err(got)) => {
            (*want != got).then(|| format!("{}: expected {want:?}, got {got:?}", f.name))
        }
        (want, got) => Some(format!("{}: expected {want:?}, got {got:?}", f.name)),
    }
}

/// Upper-tail chi-square probabilities `(k, x, Q)` from adaptive quadrature
/// of the density at 40 significant digits, rounded to 20.
#[allow(clippy::excessive_precision)]
pub const CHI2_QUADRATURE: &[(u64, f64, f64)] = &[
    (1, 0.1, 0.75182963404584928249),
    (1, 1.0, 0.31731050786291410283),
    (1, 3.0, 0.083264516663550401855),
    (2, 0.1, 0.95122942450071400909),
    (2, 1.0, 0.6065306597126334236),
    (2, 2.0, 0.3678794411714423216),
    (2, 6.0, 0.049787068367863942979),
    (5, 0.1, 0.99983768338807738499),
    (5, 1.0, 0.96256577324729636896),
    (5, 5.0, 0.41588018699550792028),
    (5, 15.0, 0.010362337915786436585),
    (10, 0.1, 0.99999999750204866399),
    (10, 1.0, 0.99982788437004415922),
    (10, 10.0, 0.44049328506521241144),
    (10, 30.0, 0.00085664121077530039211),
    (100, 0.1, 1.0),
    (100, 1.0, 1.0),
    (100, 100.0, 0.48119168452795671811),
    (100, 300.0, 7.4121008573228767906e-22),
];

pub mod enumerate {
    use std::collections::BTreeMap;

    use notezipf::simon_sim::{SimonProcess, StepChoice};
    use num_bigint::BigInt;
    use num_rational::Ratio;

    pub type Q = Ratio<BigInt>;
    pub type Dist = BTreeMap<Vec<u32>, Q>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(BigInt::from(n), BigInt::from(d))
    }

    /// Exact law of the first `steps` tokens when a copy picks a uniformly
    /// random history position. `p(t)` is the innovation probability `n/d`.
    pub fn uniform_history(steps: usize, p: impl Fn(usize) -> (i64, i64)) -> Dist {
        let mut states: Vec<(SimonProcess, Q)> = vec![(SimonProcess::new(), q(1, 1))];
        for t in 1..=steps {
            let mut next = Vec::new();
            for (proc_, prob) in states {
                if t == 1 {
                    let mut s = proc_.clone();
                    s.advance(StepChoice::Innovate);
                    next.push((s, prob));
                    continue;
                }
                let (n, d) = p(t);
                let mut s = proc_.clone();
                s.advance(StepChoice::Innovate);
                next.push((s, &prob * q(n, d)));
                let each = &prob * q(d - n, d) * q(1, (t - 1) as i64);
                for i in 0..t - 1 {
                    let mut s = proc_.clone();
                    s.advance(StepChoice::Copy(i));
                    next.push((s, each.clone()));
                }
            }
            states = next;
        }
        let mut out = Dist::new();
        for (s, prob) in states {
            *out.entry(s.history().to_vec()).or_insert_with(|| q(0, 1)) += prob;
        }
        out.retain(|_, v| *v != q(0, 1));
        out
    }

    /// Same process with reuse weighted directly by current counts.
    pub fn count_proportional(steps: usize, p: impl Fn(usize) -> (i64, i64)) -> Dist {
        let mut states: Dist = [(Vec::new(), q(1, 1))].into_iter().collect();
        for t in 1..=steps {
            let mut next = Dist::new();
            for (seq, prob) in states {
                let distinct = seq.iter().copied().max().unwrap_or(0);
                let mut add = |tok: u32, w: Q| {
                    let mut s = seq.clone();
                    s.push(tok);
                    *next.entry(s).or_insert_with(|| q(0, 1)) += w;
                };
                if t == 1 {
                    add(1, prob.clone());
                    continue;
                }
                let (n, d) = p(t);
                add(distinct + 1, &prob * q(n, d));
                for tok in 1..=distinct {
                    let count = seq.iter().filter(|&&x| x == tok).count() as i64;
                    add(tok, &prob * q(d - n, d) * q(count, (t - 1) as i64));
                }
            }
            states = next;
        }
        states.retain(|_, v| *v != q(0, 1));
        states
    }

    /// Innovation schedules used by the equivalence check.
    pub type Schedule = fn(usize) -> (i64, i64);

    pub fn schedules() -> Vec<(&'static str, Schedule)> {
        vec![
            ("constant 1/3", |_| (1, 3)),
            ("harmonic 1/t", |t| (1, t as i64)),
            ("never", |_| (0, 1)),
            ("half then 2/5", |t| if t < 4 { (1, 2) } else { (2, 5) }),
        ]
    }

    /// Compares both laws for every schedule and every length up to
    /// `max_steps`; returns the first mismatch.
    pub fn check_equivalence(max_steps: usize) -> Result<usize, String> {
        let mut compared = 0;
        for (name, p) in schedules() {
            for steps in 1..=max_steps {
                let a = uniform_history(steps, p);
                let b = count_proportional(steps, p);
                if a != b {
                    return Err(format!("{name}, T = {steps}: distributions differ"));
                }
                let total: Q = a.values().cloned().sum();
                if total != q(1, 1) {
                    return Err(format!("{name}, T = {steps}: mass {total}"));
                }
                compared += a.len();
            }
        }
        Ok(compared)
    }
}
