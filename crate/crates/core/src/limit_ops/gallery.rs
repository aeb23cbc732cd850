use std::sync::Arc;

use super::flip::FlipOperator;
use super::LimitOpError;
use crate::band::BandOperator;
use crate::entry::Entry;
use crate::scheme::{block_c, example13_entry, BlockScheme, SchemeKind};

pub const GALLERY_NAMES: [&str; 3] = ["example13", "example14", "example16-flip"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GalleryParams {
    /// Number of outer blocks laid out before the operator reverts to the identity.
    pub n_max: usize,
}

impl Default for GalleryParams {
    fn default() -> Self {
        GalleryParams { n_max: 30 }
    }
}

#[derive(Clone, Debug)]
pub enum GalleryOperator {
    Band(BandOperator),
    Flip(FlipOperator),
}

impl GalleryOperator {
    pub fn as_band(&self) -> Option<&BandOperator> {
        match self {
            GalleryOperator::Band(b) => Some(b),
            GalleryOperator::Flip(_) => None,
        }
    }

    /// The k-th building block: C_k for Example 14, the abstract B_k for Example 13.
    pub fn block(&self, k: usize) -> Option<Entry> {
        if k == 0 {
            return None;
        }
        let layout = self.as_band()?.block_layout()?;
        Some(match layout.scheme.kind() {
            SchemeKind::Example14 => Entry::Matrix(block_c(k)),
            SchemeKind::Example13 => example13_entry(k),
        })
    }
}

pub fn gallery(name: &str, params: &GalleryParams) -> Result<GalleryOperator, LimitOpError> {
    let scheme = |kind| {
        if params.n_max == 0 {
            return Err(LimitOpError::InvalidParameter("n_max must be at least 1".into()));
        }
        Ok(GalleryOperator::Band(BandOperator::from_scheme(Arc::new(BlockScheme::new(
            kind,
            params.n_max,
        )))))
    };
    match name {
        "example13" => scheme(SchemeKind::Example13),
        "example14" => scheme(SchemeKind::Example14),
        "example16-flip" => Ok(GalleryOperator::Flip(FlipOperator::flip())),
        other => Err(LimitOpError::UnknownName(other.to_string())),
    }
}
