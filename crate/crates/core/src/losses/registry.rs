//! Name-based lookup of losses and construction of the matching strategy
//! objects.

use crate::error::{Error, Result};
use crate::partition::DrawsMatrix;

use super::objective::{BinderObjective, GviObjective, MonteCarlo, Objective, ViLowerBoundObjective};
use super::{Binder, DrawLoss, Gvi, InfoDistance, LossKind, LossSpec, Omari, ZeroOne};

/// A registered loss.
#[derive(Debug, Clone, Copy)]
pub struct LossEntry {
    pub name: &'static str,
    pub kind: LossKind,
    pub description: &'static str,
}

pub static LOSSES: &[LossEntry] = &[
    LossEntry {
        name: "binder",
        kind: LossKind::Binder,
        description: "generalized Binder loss with split cost a and merge cost b",
    },
    LossEntry {
        name: "omari",
        kind: LossKind::Omari,
        description: "one minus the adjusted Rand index",
    },
    LossEntry {
        name: "vi",
        kind: LossKind::Vi,
        description: "variation of information",
    },
    LossEntry {
        name: "gvi",
        kind: LossKind::Gvi,
        description: "generalized variation of information with weights a and b",
    },
    LossEntry {
        name: "nvi",
        kind: LossKind::Nvi,
        description: "normalized variation of information",
    },
    LossEntry {
        name: "nid",
        kind: LossKind::Nid,
        description: "normalized information distance",
    },
    LossEntry {
        name: "id",
        kind: LossKind::Id,
        description: "information distance",
    },
    LossEntry {
        name: "vi-lb",
        kind: LossKind::ViLowerBound,
        description: "lower bound of the expected VI computed from the similarity matrix",
    },
    LossEntry {
        name: "zero-one",
        kind: LossKind::ZeroOne,
        description: "0-1 loss",
    },
];

pub fn lookup(name: &str) -> Result<&'static LossEntry> {
    let key = name.to_ascii_lowercase();
    LOSSES
        .iter()
        .find(|e| e.name == key)
        .ok_or_else(|| Error::UnknownLoss(name.to_string()))
}

/// Per-draw loss for `spec`. The VI lower bound is not an average of
/// per-draw losses and is rejected.
pub fn draw_loss(spec: &LossSpec) -> Result<Box<dyn DrawLoss>> {
    let LossSpec { kind, a, b } = *spec;
    Ok(match kind {
        LossKind::Binder => Box::new(Binder { a, b }),
        LossKind::Gvi => Box::new(Gvi::new(a, b)),
        LossKind::Vi => Box::new(Gvi::vi()),
        LossKind::Omari => Box::new(Omari),
        LossKind::Nvi | LossKind::Nid | LossKind::Id => Box::new(InfoDistance(kind)),
        LossKind::ZeroOne => Box::new(ZeroOne),
        LossKind::ViLowerBound => {
            return Err(Error::Usage(
                "vi-lb is a similarity-matrix criterion; use vi_criteria".into(),
            ))
        }
    })
}

/// Search objective for `spec` over `draws`. Binder, VI and GVI get the
/// count-based placement shortcuts; the rest score placements by the full
/// expected loss.
pub fn objective<'a>(spec: &LossSpec, draws: &'a DrawsMatrix) -> Box<dyn Objective + 'a> {
    let LossSpec { kind, a, b } = *spec;
    match kind {
        LossKind::Binder => Box::new(BinderObjective::new(draws, a, b)),
        LossKind::Gvi => Box::new(GviObjective::new(draws, Gvi::new(a, b))),
        LossKind::Vi => Box::new(GviObjective::new(draws, Gvi::vi())),
        LossKind::Omari => Box::new(MonteCarlo::new(draws, Omari)),
        LossKind::Nvi | LossKind::Nid | LossKind::Id => {
            Box::new(MonteCarlo::new(draws, InfoDistance(kind)))
        }
        LossKind::ZeroOne => Box::new(MonteCarlo::new(draws, ZeroOne)),
        LossKind::ViLowerBound => Box::new(ViLowerBoundObjective::new(draws)),
    }
}
