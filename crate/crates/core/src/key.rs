//! Side information needed for semi-blind extraction, stored as JSON.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{read_to_string, write_atomic};
use crate::transforms::GraphKind;

pub const KEY_VERSION: u64 = 1;
pub const WAVELET_HAAR: &str = "haar";

/// Where one watermark bit went and what the host looked like there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyEntry {
    pub block: usize,
    pub alpha: f64,
    /// Largest singular value of the host block's transformed LL band.
    pub s_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WatermarkKey {
    pub version: u64,
    pub block_size: usize,
    pub wavelet: String,
    pub graph: GraphKind,
    pub wm_width: usize,
    pub wm_height: usize,
    /// One entry per watermark bit, row-major bit order.
    pub entries: Vec<KeyEntry>,
}

impl WatermarkKey {
    pub fn new(
        block_size: usize,
        graph: GraphKind,
        wm_width: usize,
        wm_height: usize,
        entries: Vec<KeyEntry>,
    ) -> Result<Self> {
        let key = Self {
            version: KEY_VERSION,
            block_size,
            wavelet: WAVELET_HAAR.to_string(),
            graph,
            wm_width,
            wm_height,
            entries,
        };
        key.validate()?;
        Ok(key)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != KEY_VERSION {
            return Err(Error::UnsupportedKeyVersion(self.version));
        }
        if self.wavelet != WAVELET_HAAR {
            return Err(Error::Key(format!("unsupported wavelet '{}'", self.wavelet)));
        }
        if self.block_size < 2 || self.block_size % 2 != 0 {
            return Err(Error::Key(format!("invalid block size {}", self.block_size)));
        }
        if self.wm_width == 0 || self.wm_height == 0 {
            return Err(Error::Key("empty watermark dimensions".into()));
        }
        if self.entries.len() != self.wm_width * self.wm_height {
            return Err(Error::Key(format!(
                "{} entries for a {}x{} watermark",
                self.entries.len(),
                self.wm_width,
                self.wm_height
            )));
        }
        let mut seen = HashSet::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            if !seen.insert(e.block) {
                return Err(Error::Key(format!("block {} listed twice", e.block)));
            }
            if !(e.alpha.is_finite() && e.alpha > 0.0) {
                return Err(Error::Key(format!("entry {i}: alpha must be positive")));
            }
            if !(e.s_h.is_finite() && e.s_h >= 0.0) {
                return Err(Error::Key(format!("entry {i}: s_h must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Key(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(KEY_VERSION) => {}
            Some(other) => return Err(Error::UnsupportedKeyVersion(other)),
            None => return Err(Error::Key("missing or non-integer 'version'".into())),
        }
        let key: WatermarkKey =
            serde_json::from_value(value).map_err(|e| Error::Key(e.to_string()))?;
        key.validate()?;
        Ok(key)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        write_atomic(path.as_ref(), text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read_to_string(path)?)
    }
}
