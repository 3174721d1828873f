//! Messages exchanged between workers and their binary framing.
//!
//! Frame layout: a 4-byte little-endian length covering everything after it,
//! a 1-byte kind, then the payload as 4-byte little-endian words.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::coloring::Color;
use crate::partition::WorkerId;
use crate::program::{AtomId, RuleId};

/// Worker-side summary sent to the coordinator after a propagation phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub conflict: bool,
    /// Lowest owned supported, uncolored, non-constraint rule.
    pub candidate: Option<RuleId>,
    pub uncolored: u32,
    /// Rules colored ⊖ by the last sweep.
    pub swept: u32,
}

/// Termination-detection token (counter and color as in Safra's scheme).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Token {
    /// Sum of (sent - received) basic messages over the workers visited.
    pub count: i32,
    pub black: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    /// A defining rule of `atom` was colored ⊕ (head edge).
    AtomProvenTrue {
        epoch: u32,
        atom: AtomId,
    },
    /// A defining rule of `atom` was colored ⊖ (head edge).
    AtomDefinerDisabled {
        epoch: u32,
        atom: AtomId,
    },
    /// A body atom of `rule` became proven true or false.
    AtomDecided {
        epoch: u32,
        rule: RuleId,
        positive: bool,
        value: bool,
    },
    /// A defining rule of `atom` is founded.
    AtomFounded {
        epoch: u32,
        atom: AtomId,
    },
    /// One positive body atom of `rule` is founded.
    BodyFounded {
        epoch: u32,
        rule: RuleId,
    },

    Decide {
        epoch: u32,
        level: u32,
        rule: RuleId,
        color: Color,
    },
    /// Undo to the state before `level` was opened, then color `rule` ⊖ at `level`.
    Backtrack {
        epoch: u32,
        level: u32,
        rule: RuleId,
    },
    StartFounding {
        epoch: u32,
    },
    Sweep {
        epoch: u32,
    },
    ReportRequest,
    ReportCandidates(Report),
    QuiescenceToken(Token),
    /// Request for the owned part of the current model.
    ModelFound,
    ModelPart {
        atoms: Vec<AtomId>,
    },
    Halt,
}

impl Body {
    /// Vertex-to-vertex propagation, as opposed to coordination traffic.
    pub fn is_propagation(&self) -> bool {
        matches!(
            self,
            Body::AtomProvenTrue { .. }
                | Body::AtomDefinerDisabled { .. }
                | Body::AtomDecided { .. }
                | Body::AtomFounded { .. }
                | Body::BodyFounded { .. }
        )
    }

    pub fn is_token(&self) -> bool {
        matches!(self, Body::QuiescenceToken(_))
    }

    /// Phase a propagation or phase-opening message belongs to.
    pub fn epoch(&self) -> Option<u32> {
        match *self {
            Body::AtomProvenTrue { epoch, .. }
            | Body::AtomDefinerDisabled { epoch, .. }
            | Body::AtomDecided { epoch, .. }
            | Body::AtomFounded { epoch, .. }
            | Body::BodyFounded { epoch, .. }
            | Body::Decide { epoch, .. }
            | Body::Backtrack { epoch, .. }
            | Body::StartFounding { epoch }
            | Body::Sweep { epoch } => Some(epoch),
            _ => None,
        }
    }

    pub fn kind(&self) -> u8 {
        match self {
            Body::AtomProvenTrue { .. } => 1,
            Body::AtomDefinerDisabled { .. } => 2,
            Body::AtomDecided { .. } => 3,
            Body::AtomFounded { .. } => 4,
            Body::BodyFounded { .. } => 5,
            Body::Decide { .. } => 10,
            Body::Backtrack { .. } => 11,
            Body::StartFounding { .. } => 12,
            Body::Sweep { .. } => 13,
            Body::ReportRequest => 14,
            Body::ReportCandidates(_) => 15,
            Body::QuiescenceToken(_) => 16,
            Body::ModelFound => 17,
            Body::ModelPart { .. } => 18,
            Body::Halt => 19,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub src: WorkerId,
    pub dst: WorkerId,
    pub body: Body,
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("frame too short: {0} bytes")]
    Truncated(usize),
    #[error("unknown message kind {0}")]
    UnknownKind(u8),
    #[error("bad payload for kind {kind}: {words} words")]
    BadPayload { kind: u8, words: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

const NONE_ID: u32 = u32::MAX;

fn color_word(c: Color) -> u32 {
    match c {
        Color::Plus => 0,
        Color::Minus => 1,
    }
}

fn payload(body: &Body) -> Vec<u32> {
    match body {
        Body::AtomProvenTrue { epoch, atom }
        | Body::AtomDefinerDisabled { epoch, atom }
        | Body::AtomFounded { epoch, atom } => vec![*epoch, atom.0],
        Body::AtomDecided {
            epoch,
            rule,
            positive,
            value,
        } => vec![*epoch, rule.0, u32::from(*positive), u32::from(*value)],
        Body::BodyFounded { epoch, rule } => vec![*epoch, rule.0],
        Body::Decide {
            epoch,
            level,
            rule,
            color,
        } => vec![*epoch, *level, rule.0, color_word(*color)],
        Body::Backtrack { epoch, level, rule } => vec![*epoch, *level, rule.0],
        Body::StartFounding { epoch } | Body::Sweep { epoch } => vec![*epoch],
        Body::ReportRequest | Body::ModelFound | Body::Halt => vec![],
        Body::ReportCandidates(r) => vec![
            u32::from(r.conflict),
            r.candidate.map_or(NONE_ID, |c| c.0),
            r.uncolored,
            r.swept,
        ],
        Body::QuiescenceToken(t) => vec![t.count as u32, u32::from(t.black)],
        Body::ModelPart { atoms } => atoms.iter().map(|a| a.0).collect(),
    }
}

/// Encodes one frame, length prefix included.
pub fn encode(body: &Body) -> Vec<u8> {
    let words = payload(body);
    let len = 1 + 4 * words.len();
    let mut out = Vec::with_capacity(4 + len);
    out.extend_from_slice(&(len as u32).to_le_bytes());
    out.push(body.kind());
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

/// Decodes the part of a frame after the length prefix.
pub fn decode(frame: &[u8]) -> Result<Body, WireError> {
    let (&kind, rest) = frame.split_first().ok_or(WireError::Truncated(0))?;
    if rest.len() % 4 != 0 {
        return Err(WireError::Truncated(frame.len()));
    }
    let w: Vec<u32> = rest
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let bad = || WireError::BadPayload { kind, words: w.len() };
    let need = |n: usize| if w.len() == n { Ok(()) } else { Err(bad()) };
    let flag = |x: u32| match x {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(bad()),
    };
    Ok(match kind {
        1 | 2 | 4 => {
            need(2)?;
            let (epoch, atom) = (w[0], AtomId(w[1]));
            match kind {
                1 => Body::AtomProvenTrue { epoch, atom },
                2 => Body::AtomDefinerDisabled { epoch, atom },
                _ => Body::AtomFounded { epoch, atom },
            }
        }
        3 => {
            need(4)?;
            Body::AtomDecided {
                epoch: w[0],
                rule: RuleId(w[1]),
                positive: flag(w[2])?,
                value: flag(w[3])?,
            }
        }
        5 => {
            need(2)?;
            Body::BodyFounded {
                epoch: w[0],
                rule: RuleId(w[1]),
            }
        }
        10 => {
            need(4)?;
            Body::Decide {
                epoch: w[0],
                level: w[1],
                rule: RuleId(w[2]),
                color: if flag(w[3])? { Color::Minus } else { Color::Plus },
            }
        }
        11 => {
            need(3)?;
            Body::Backtrack {
                epoch: w[0],
                level: w[1],
                rule: RuleId(w[2]),
            }
        }
        12 => {
            need(1)?;
            Body::StartFounding { epoch: w[0] }
        }
        13 => {
            need(1)?;
            Body::Sweep { epoch: w[0] }
        }
        14 => {
            need(0)?;
            Body::ReportRequest
        }
        15 => {
            need(4)?;
            Body::ReportCandidates(Report {
                conflict: flag(w[0])?,
                candidate: (w[1] != NONE_ID).then_some(RuleId(w[1])),
                uncolored: w[2],
                swept: w[3],
            })
        }
        16 => {
            need(2)?;
            Body::QuiescenceToken(Token {
                count: w[0] as i32,
                black: flag(w[1])?,
            })
        }
        17 => {
            need(0)?;
            Body::ModelFound
        }
        18 => Body::ModelPart {
            atoms: w.iter().map(|&a| AtomId(a)).collect(),
        },
        19 => {
            need(0)?;
            Body::Halt
        }
        k => return Err(WireError::UnknownKind(k)),
    })
}

pub fn write_frame(mut w: impl Write, body: &Body) -> Result<(), WireError> {
    w.write_all(&encode(body))?;
    Ok(())
}

/// Reads one frame. `Ok(None)` on a clean end of stream between frames.
pub fn read_frame(mut r: impl Read) -> Result<Option<Body>, WireError> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_le_bytes(len) as usize;
    if len == 0 {
        return Err(WireError::Truncated(0));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    decode(&buf).map(Some)
}
