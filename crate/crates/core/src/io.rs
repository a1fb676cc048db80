//! Versioned problem files.
//!
//! A problem file is a small TOML document:
//!
//! ```text
//! schema_version = 1
//! kind = "moments"            # or "switches"
//! values = [5.0000000000000000e-1, 5.0000000000000000e-1]
//! domain_scale = 1.0000000000000000e0   # optional
//!
//! [tolerances]                # optional
//! imag_tol = 1.0000000000000000e-6
//! residual_tol = 1.0000000000000000e-8
//! ```
//!
//! Numbers are written with 17 significant digits so every `f64` survives a
//! write/read cycle unchanged.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::markov::{MomentVector, SwitchConfiguration};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Moments,
    Switches,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Moments => "moments",
            ProblemKind::Switches => "switches",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub imag_tol: Option<f64>,
    pub residual_tol: Option<f64>,
}

impl Tolerances {
    fn is_empty(&self) -> bool {
        self.imag_tol.is_none() && self.residual_tol.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub kind: ProblemKind,
    pub values: Vec<f64>,
    #[serde(default)]
    pub domain_scale: Option<f64>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

impl ProblemFile {
    pub fn moments(m: &MomentVector) -> Self {
        Self::bare(ProblemKind::Moments, m.values().to_vec())
    }

    pub fn switches(u: &SwitchConfiguration) -> Self {
        Self::bare(ProblemKind::Switches, u.points().to_vec())
    }

    fn bare(kind: ProblemKind, values: Vec<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind,
            values,
            domain_scale: None,
            tolerances: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ProblemFile = toml::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed problem file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let Some(s) = self.domain_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "domain_scale must be positive, got {s}"
                )));
            }
        }
        match self.kind {
            ProblemKind::Moments => MomentVector::new(self.values.clone()).map(drop),
            ProblemKind::Switches => SwitchConfiguration::new(self.values.clone()).map(drop),
        }
    }

    pub fn to_moments(&self) -> Result<MomentVector> {
        self.expect(ProblemKind::Moments)?;
        MomentVector::new(self.values.clone())
    }

    pub fn to_switches(&self) -> Result<SwitchConfiguration> {
        self.expect(ProblemKind::Switches)?;
        SwitchConfiguration::new(self.values.clone())
    }

    fn expect(&self, kind: ProblemKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "expected a {} file, got kind = \"{}\"",
                kind.as_str(),
                self.kind.as_str()
            )))
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "schema_version = {}", self.schema_version);
        let _ = writeln!(out, "kind = \"{}\"", self.kind.as_str());
        let values: Vec<String> = self.values.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "values = [{}]", values.join(", "));
        if let Some(s) = self.domain_scale {
            let _ = writeln!(out, "domain_scale = {}", fmt_f64(s));
        }
        if let Some(t) = self.tolerances.filter(|t| !t.is_empty()) {
            out.push_str("\n[tolerances]\n");
            if let Some(v) = t.imag_tol {
                let _ = writeln!(out, "imag_tol = {}", fmt_f64(v));
            }
            if let Some(v) = t.residual_tol {
                let _ = writeln!(out, "residual_tol = {}", fmt_f64(v));
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
    }
}

/// Decimal with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
