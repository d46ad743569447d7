//! Below-threshold OPO noise per supermode.
//!
//! Each supermode obeys `dS/dt = −γS + √(2γ) S_in + γ p (Λ/|Λ₁|) S†`, with the
//! pump fraction `p = 1` at threshold. For `X = S + S†`, `P = −i(S − S†)`,
//! `Λ > 0` amplifies X and squeezes P. Frequencies are in units of `γ`.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernellab::csv_error;
use crate::supermodes::SupermodeSet;

/// Pump parameter at threshold, `1/|Λ₁|`.
pub fn threshold_pump(s: &SupermodeSet) -> Result<f64> {
    threshold_from_values(s.eigenvalues())
}

pub fn threshold_from_values(eigenvalues: &[f64]) -> Result<f64> {
    let lead = eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max);
    if eigenvalues.is_empty() || lead == 0.0 {
        return Err(Error::invalid("threshold needs at least one nonzero eigenvalue"));
    }
    Ok(1.0 / lead)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    /// `X = S + S†`, angle 0.
    Amplitude,
    /// `P = −i(S − S†)`, angle π/2.
    Phase,
}

impl Quadrature {
    pub fn angle(self) -> f64 {
        match self {
            Quadrature::Amplitude => 0.0,
            Quadrature::Phase => FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    pub omega: f64,
    pub v_minus: f64,
    pub v_plus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeNoise {
    /// 1-based supermode index.
    pub mode: usize,
    pub eigenvalue: f64,
    pub r: f64,
    pub v_minus_0: f64,
    pub v_plus_0: f64,
    pub squeezed: Quadrature,
    pub direction: f64,
    pub spectrum: Vec<NoiseSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub pump_fraction: f64,
    pub modes: Vec<ModeNoise>,
}

/// Squeezed quadrature noise `1 − 4r/((1+r)² + Ω²)`, shot noise = 1.
pub fn v_minus(r: f64, omega: f64) -> f64 {
    1.0 - 4.0 * r / ((1.0 + r).powi(2) + omega * omega)
}

/// Anti-squeezed quadrature noise `1 + 4r/((1−r)² + Ω²)`.
pub fn v_plus(r: f64, omega: f64) -> f64 {
    1.0 + 4.0 * r / ((1.0 - r).powi(2) + omega * omega)
}

pub fn squeezing_report(s: &SupermodeSet, pump_fraction: f64, omega_grid: &[f64]) -> Result<SqueezingReport> {
    squeezing_report_from_values(s.eigenvalues(), pump_fraction, omega_grid)
}

pub fn squeezing_report_from_values(
    eigenvalues: &[f64],
    pump_fraction: f64,
    omega_grid: &[f64],
) -> Result<SqueezingReport> {
    if pump_fraction.is_nan() || pump_fraction < 0.0 {
        return Err(Error::invalid(format!("pump fraction must be non-negative, got {pump_fraction}")));
    }
    if pump_fraction >= 1.0 {
        return Err(Error::AboveThreshold(pump_fraction));
    }
    if omega_grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("analysis frequencies must be finite"));
    }
    let inv_lead = threshold_from_values(eigenvalues)?;
    let modes = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            let r = pump_fraction * lam.abs() * inv_lead;
            let squeezed = if lam > 0.0 {
                Quadrature::Phase
            } else {
                Quadrature::Amplitude
            };
            ModeNoise {
                mode: i + 1,
                eigenvalue: lam,
                r,
                v_minus_0: v_minus(r, 0.0),
                v_plus_0: v_plus(r, 0.0),
                squeezed,
                direction: squeezed.angle(),
                spectrum: omega_grid
                    .iter()
                    .map(|&omega| NoiseSample {
                        omega,
                        v_minus: v_minus(r, omega),
                        v_plus: v_plus(r, omega),
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(SqueezingReport { pump_fraction, modes })
}

/// Noise reduction in dB, `−10 log₁₀ v`.
pub fn squeezing_db(v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::invalid(format!("noise level must be positive, got {v}")));
    }
    Ok(-10.0 * v.log10())
}

impl SqueezingReport {
    /// One row per supermode with the zero-frequency figures.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["mode", "eigenvalue", "r", "v_minus_0", "v_plus_0", "squeezing_db", "direction"])
            .map_err(csv_error)?;
        for m in &self.modes {
            let db = squeezing_db(m.v_minus_0).unwrap_or(f64::INFINITY);
            w.write_record([
                m.mode.to_string(),
                format!("{:e}", m.eigenvalue),
                format!("{:e}", m.r),
                format!("{:e}", m.v_minus_0),
                format!("{:e}", m.v_plus_0),
                format!("{db:.6}"),
                format!("{:.6}", m.direction),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}
