//! Standard MIDI File decoding down to timed note events.
//!
//! Only what the note statistics need is kept: note-on/note-off events with
//! absolute tick times, per track. Meta events, sysex and other channel
//! messages are consumed and dropped. Tempo is ignored because durations are
//! later measured against the file's ticks-per-quarter division.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::SmfError;

/// Decoded `MThd` contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmfHeader {
    pub format: SmfFormat,
    /// Number of `MTrk` chunks actually decoded.
    pub track_count: u16,
    /// Ticks per quarter note.
    pub division: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmfFormat {
    SingleTrack,
    Parallel,
    Sequential,
}

impl SmfFormat {
    fn from_raw(raw: u16) -> Result<Self, SmfError> {
        match raw {
            0 => Ok(SmfFormat::SingleTrack),
            1 => Ok(SmfFormat::Parallel),
            2 => Ok(SmfFormat::Sequential),
            other => Err(SmfError::UnsupportedFormat(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoteEventKind {
    /// Note-on with nonzero velocity.
    On { velocity: u8 },
    /// Note-off, or note-on with velocity 0.
    Off,
}

/// A note event with its absolute position in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoteEvent {
    pub tick: u64,
    pub channel: u8,
    pub key: u8,
    pub kind: NoteEventKind,
}

/// Note events of one `MTrk` chunk, plus the tick at which it ended.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrackEvents {
    pub events: Vec<NoteEvent>,
    /// Tick of the end-of-track meta event, or of the last event when the
    /// chunk ended without one.
    pub end_tick: u64,
}

/// Warnings collected while parsing and pairing. None of these are fatal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SmfDiagnostics {
    /// Track count declared in the header, which may differ from the number
    /// of chunks found.
    pub declared_tracks: u16,
    pub unknown_chunks: usize,
    /// Bytes ignored after the last declared track or an incomplete chunk
    /// header.
    pub trailing_bytes: usize,
    pub missing_end_of_track: usize,
    pub unmatched_on: usize,
    pub orphan_off: usize,
    pub zero_length: usize,
}

impl SmfDiagnostics {
    pub fn merge(&mut self, other: &SmfDiagnostics) {
        self.unknown_chunks += other.unknown_chunks;
        self.trailing_bytes += other.trailing_bytes;
        self.missing_end_of_track += other.missing_end_of_track;
        self.unmatched_on += other.unmatched_on;
        self.orphan_off += other.orphan_off;
        self.zero_length += other.zero_length;
    }
}

/// Parsed file: header, per-track note events, diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smf {
    pub header: SmfHeader,
    pub tracks: Vec<TrackEvents>,
    pub diagnostics: SmfDiagnostics,
}

/// One sounded note.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RawNote {
    pub pitch: u8,
    pub onset: u64,
    pub duration: u64,
    pub track: usize,
    pub channel: u8,
}

/// Byte cursor bounded to one chunk; every read is checked against the end.
struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    end: usize,
    /// Absolute offset of `buf[0]` in the file, for error messages.
    base: usize,
}

impl<'a> Cursor<'a> {
    fn at(&self) -> usize {
        self.base + self.pos
    }

    fn remaining(&self) -> usize {
        self.end - self.pos
    }

    fn u8(&mut self) -> Result<u8, SmfError> {
        if self.pos >= self.end {
            return Err(self.truncated(1));
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        Ok(b)
    }

    fn peek(&self) -> Option<u8> {
        (self.pos < self.end).then(|| self.buf[self.pos])
    }

    fn skip(&mut self, n: usize) -> Result<(), SmfError> {
        if n > self.remaining() {
            return Err(self.truncated(n));
        }
        self.pos += n;
        Ok(())
    }

    fn truncated(&self, wanted: usize) -> SmfError {
        SmfError::TruncatedChunk {
            offset: self.at(),
            declared: wanted,
            available: self.remaining(),
        }
    }

    /// At most four bytes, seven bits each, high bit set on all but the last.
    fn vlq(&mut self) -> Result<u32, SmfError> {
        let start = self.at();
        let mut value = 0u32;
        for _ in 0..4 {
            let b = self
                .u8()
                .map_err(|_| SmfError::InvalidVlq { offset: start })?;
            value = (value << 7) | u32::from(b & 0x7f);
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(SmfError::InvalidVlq { offset: start })
    }
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn read_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([bytes[at], bytes[at + 1]])
}

/// Decodes a complete SMF buffer.
pub fn parse_smf(bytes: &[u8]) -> Result<Smf, SmfError> {
    if bytes.len() < 8 || &bytes[..4] != b"MThd" {
        return Err(SmfError::MissingHeader);
    }
    let header_len = read_u32(bytes, 4) as usize;
    if header_len > bytes.len() - 8 {
        return Err(SmfError::TruncatedChunk {
            offset: 0,
            declared: header_len,
            available: bytes.len() - 8,
        });
    }
    if header_len < 6 {
        return Err(SmfError::ShortHeader(header_len));
    }
    let format = SmfFormat::from_raw(read_u16(bytes, 8))?;
    let declared_tracks = read_u16(bytes, 10);
    let division = read_u16(bytes, 12);
    if division & 0x8000 != 0 {
        return Err(SmfError::SmpteDivision { raw: division });
    }
    if division == 0 {
        return Err(SmfError::ZeroDivision);
    }

    let mut diagnostics = SmfDiagnostics {
        declared_tracks,
        ..Default::default()
    };
    let mut tracks = Vec::new();
    let mut offset = 8 + header_len;
    while offset < bytes.len() {
        if tracks.len() == usize::from(declared_tracks) || bytes.len() - offset < 8 {
            diagnostics.trailing_bytes = bytes.len() - offset;
            break;
        }
        let id = &bytes[offset..offset + 4];
        let len = read_u32(bytes, offset + 4) as usize;
        let body = offset + 8;
        if len > bytes.len() - body {
            return Err(SmfError::TruncatedChunk {
                offset,
                declared: len,
                available: bytes.len() - body,
            });
        }
        if id == b"MTrk" {
            let mut cursor = Cursor {
                buf: &bytes[body..body + len],
                pos: 0,
                end: len,
                base: body,
            };
            let (track, saw_end) = parse_track(&mut cursor)?;
            if !saw_end {
                diagnostics.missing_end_of_track += 1;
            }
            tracks.push(track);
        } else {
            diagnostics.unknown_chunks += 1;
        }
        offset = body + len;
    }

    let header = SmfHeader {
        format,
        track_count: tracks.len() as u16,
        division,
    };
    Ok(Smf {
        header,
        tracks,
        diagnostics,
    })
}

fn parse_track(cur: &mut Cursor<'_>) -> Result<(TrackEvents, bool), SmfError> {
    let mut events = Vec::new();
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    while cur.remaining() > 0 {
        tick += u64::from(cur.vlq()?);
        let at = cur.at();
        let first = cur.peek().ok_or_else(|| cur.truncated(1))?;
        let status = if first & 0x80 != 0 {
            cur.u8()?;
            first
        } else {
            running.ok_or(SmfError::DanglingStatus {
                offset: at,
                byte: first,
            })?
        };
        match status {
            0xff => {
                running = None;
                let kind = cur.u8()?;
                let len = cur.vlq()? as usize;
                cur.skip(len)?;
                if kind == 0x2f {
                    return Ok((
                        TrackEvents {
                            events,
                            end_tick: tick,
                        },
                        true,
                    ));
                }
            }
            0xf0 | 0xf7 => {
                running = None;
                let len = cur.vlq()? as usize;
                cur.skip(len)?;
            }
            0xf1..=0xfe => {
                return Err(SmfError::InvalidStatus {
                    offset: at,
                    byte: status,
                })
            }
            _ => {
                running = Some(status);
                let channel = status & 0x0f;
                match status & 0xf0 {
                    0x80 | 0x90 => {
                        let key = cur.u8()? & 0x7f;
                        let velocity = cur.u8()? & 0x7f;
                        let kind = if status & 0xf0 == 0x90 && velocity > 0 {
                            NoteEventKind::On { velocity }
                        } else {
                            NoteEventKind::Off
                        };
                        events.push(NoteEvent {
                            tick,
                            channel,
                            key,
                            kind,
                        });
                    }
                    0xc0 | 0xd0 => cur.skip(1)?,
                    _ => cur.skip(2)?,
                }
            }
        }
    }
    Ok((
        TrackEvents {
            events,
            end_tick: tick,
        },
        false,
    ))
}

/// Pairs note-ons with note-offs into [`RawNote`]s.
///
/// Matching is FIFO per `(channel, key)` within a track. Note-ons still open
/// at the end of a track are closed at its end tick. Orphan note-offs and
/// zero-length notes are dropped; all three cases are tallied in the
/// returned diagnostics. Notes come out grouped by track, in onset order
/// within each track.
pub fn pair_notes(tracks: &[TrackEvents]) -> (Vec<RawNote>, SmfDiagnostics) {
    let mut diag = SmfDiagnostics::default();
    let mut notes = Vec::new();
    for (track_idx, track) in tracks.iter().enumerate() {
        let mut open: HashMap<(u8, u8), VecDeque<usize>> = HashMap::new();
        // (onset, channel, key, closing tick); indices into this vector keep
        // the output ordered by onset regardless of close order.
        let mut started: Vec<(u64, u8, u8, Option<u64>)> = Vec::new();
        for ev in &track.events {
            match ev.kind {
                NoteEventKind::On { .. } => {
                    open.entry((ev.channel, ev.key))
                        .or_default()
                        .push_back(started.len());
                    started.push((ev.tick, ev.channel, ev.key, None));
                }
                NoteEventKind::Off => {
                    match open
                        .get_mut(&(ev.channel, ev.key))
                        .and_then(VecDeque::pop_front)
                    {
                        Some(i) => started[i].3 = Some(ev.tick),
                        None => diag.orphan_off += 1,
                    }
                }
            }
        }
        for (onset, channel, key, close) in started {
            let end = close.unwrap_or_else(|| {
                diag.unmatched_on += 1;
                track.end_tick.max(onset)
            });
            let duration = end - onset;
            if duration == 0 {
                diag.zero_length += 1;
                continue;
            }
            notes.push(RawNote {
                pitch: key,
                onset,
                duration,
                track: track_idx,
                channel,
            });
        }
    }
    (notes, diag)
}
