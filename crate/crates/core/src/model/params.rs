use serde::{Deserialize, Serialize};

use super::density::{PiecewiseDensity, BIN_COUNT};
use crate::error::{Error, Result};

const FORMAT: &str = "psm-likelihood/global-params";
const VERSION: u32 = 1;

/// Parameters shared by every spectrum of one charge state.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalParams {
    /// Charge state the parameters were trained for.
    pub charge: u32,
    /// Location noise scale, Daltons.
    pub sigma: f64,
    /// Logistic slope on theoretical intensity.
    pub beta: f64,
    /// Noise-peak intensity density.
    pub f0: PiecewiseDensity,
    /// Emitted-peak intensity density.
    pub f1: PiecewiseDensity,
    /// Truncation half-width, Daltons.
    pub w: f64,
    /// Length of the m/z range noise locations are drawn from, Daltons.
    pub r: f64,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    charge: u32,
    sigma: f64,
    beta: f64,
    w: f64,
    r: f64,
    edges: Vec<f64>,
    f0: Vec<f64>,
    f1: Vec<f64>,
}

impl GlobalParams {
    pub fn new(
        charge: u32,
        sigma: f64,
        beta: f64,
        f0: PiecewiseDensity,
        f1: PiecewiseDensity,
        w: f64,
        r: f64,
    ) -> Result<Self> {
        let p = Self {
            charge,
            sigma,
            beta,
            f0,
            f1,
            w,
            r,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("w", self.w)?;
        positive("r", self.r)?;
        if self.charge == 0 {
            return Err(Error::InvalidParams("charge must be positive".into()));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParams("beta must be finite".into()));
        }
        if !self.f0.same_edges(&self.f1) {
            return Err(Error::InvalidParams("f0 and f1 must share bin edges".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = Document {
            format: FORMAT.into(),
            version: VERSION,
            charge: self.charge,
            sigma: self.sigma,
            beta: self.beta,
            w: self.w,
            r: self.r,
            edges: self.f0.edges().to_vec(),
            f0: self.f0.masses().to_vec(),
            f1: self.f1.masses().to_vec(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.format != FORMAT {
            return Err(Error::InvalidParams(format!("unexpected format tag {:?}", doc.format)));
        }
        if doc.version != VERSION {
            return Err(Error::InvalidParams(format!("unsupported version {}", doc.version)));
        }
        let array = |name: &str, v: &[f64], len: usize| -> Result<Vec<f64>> {
            if v.len() != len {
                return Err(Error::InvalidParams(format!("{name} needs {len} values, got {}", v.len())));
            }
            Ok(v.to_vec())
        };
        let edges: [f64; BIN_COUNT + 1] = array("edges", &doc.edges, BIN_COUNT + 1)?.try_into().unwrap();
        let f0: [f64; BIN_COUNT] = array("f0", &doc.f0, BIN_COUNT)?.try_into().unwrap();
        let f1: [f64; BIN_COUNT] = array("f1", &doc.f1, BIN_COUNT)?.try_into().unwrap();
        Self::new(
            doc.charge,
            doc.sigma,
            doc.beta,
            PiecewiseDensity::new(edges, f0)?,
            PiecewiseDensity::new(edges, f1)?,
            doc.w,
            doc.r,
        )
    }

    /// Errors if `charge` differs from the charge these parameters describe.
    pub fn check_charge(&self, charge: u32, id: &str) -> Result<()> {
        if charge == self.charge {
            Ok(())
        } else {
            Err(Error::ChargeMismatch {
                expected: self.charge,
                found: charge,
                id: id.to_string(),
            })
        }
    }
}
