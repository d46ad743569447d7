//! Pump spectral amplitudes.
//!
//! Spectra are dimensionless shape functions of the detuning `ω` from the pump
//! carrier; overall pump power is carried separately by the pump fraction in
//! [`crate::opodyn`]. Times (`tau_p`, `beta`, `t`) and frequencies share one
//! unit system, normally `τ₁` and `1/τ₁`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sinc, sine_integral};

/// One harmonic `b cos(beta ω)` of a pulse-shaper mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineTerm {
    pub b: f64,
    pub beta: f64,
}

/// A delayed/advanced copy pair of the base pulse train, `b [α(t - t_n) + α(t + t_n)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayTerm {
    pub b: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PumpSpectrum {
    /// `exp(-τ_p² ω² / 2)`; `tau_p = 0` is a flat spectrum.
    Gaussian { tau_p: f64 },
    /// Train of rectangular pulses of duration `tau_p`: `sinc(τ_p ω)`.
    Rectangular { tau_p: f64 },
    /// Base spectrum times a harmonic mask `Σ b_n cos(β_n ω)` with `β_0 = 0`.
    Shaped {
        base: Box<PumpSpectrum>,
        coeffs: Vec<CosineTerm>,
    },
    /// Superposition of delayed trains: `base(ω) [b0 + Σ b_n cos(t_n ω)]`.
    DelayComb {
        base: Box<PumpSpectrum>,
        b0: f64,
        terms: Vec<DelayTerm>,
    },
}

impl PumpSpectrum {
    pub fn flat() -> Self {
        PumpSpectrum::Gaussian { tau_p: 0.0 }
    }

    pub fn shaped(base: PumpSpectrum, coeffs: Vec<CosineTerm>) -> Result<Self> {
        let p = PumpSpectrum::Shaped {
            base: Box::new(base),
            coeffs,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn delay_comb(base: PumpSpectrum, b0: f64, terms: Vec<DelayTerm>) -> Result<Self> {
        let p = PumpSpectrum::DelayComb {
            base: Box::new(base),
            b0,
            terms,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PumpSpectrum::Gaussian { tau_p } | PumpSpectrum::Rectangular { tau_p } => {
                if !(tau_p.is_finite() && *tau_p >= 0.0) {
                    return Err(Error::invalid(format!(
                        "pulse duration must be finite and non-negative, got {tau_p}"
                    )));
                }
                Ok(())
            }
            PumpSpectrum::Shaped { base, coeffs } => {
                base.validate()?;
                let first = coeffs
                    .first()
                    .ok_or_else(|| Error::invalid("shaped pump needs at least one coefficient"))?;
                if first.beta != 0.0 {
                    return Err(Error::invalid("first shaper coefficient must have beta = 0"));
                }
                check_distinct(coeffs.iter().map(|c| c.beta), 0.0, "shaper beta")?;
                if coeffs.iter().any(|c| !c.b.is_finite()) {
                    return Err(Error::invalid("shaper amplitudes must be finite"));
                }
                Ok(())
            }
            PumpSpectrum::DelayComb { base, b0, terms } => {
                base.validate()?;
                if !b0.is_finite() || terms.iter().any(|t| !t.b.is_finite()) {
                    return Err(Error::invalid("delay-line amplitudes must be finite"));
                }
                if terms.iter().any(|t| t.t <= 0.0) {
                    return Err(Error::invalid("delays must be positive"));
                }
                check_distinct(terms.iter().map(|t| t.t), f64::MIN_POSITIVE, "delay")
            }
        }
    }

    /// Spectral amplitude at detuning `omega`. Even in `omega` for every variant.
    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            PumpSpectrum::Gaussian { tau_p } => {
                let a = tau_p * omega;
                (-0.5 * a * a).exp()
            }
            PumpSpectrum::Rectangular { tau_p } => sinc(tau_p * omega),
            PumpSpectrum::Shaped { base, coeffs } => {
                base.eval(omega) * coeffs.iter().map(|c| c.b * (c.beta * omega).cos()).sum::<f64>()
            }
            PumpSpectrum::DelayComb { base, b0, terms } => {
                base.eval(omega)
                    * (b0 + terms.iter().map(|t| t.b * (t.t * omega).cos()).sum::<f64>())
            }
        }
    }

    /// Copy with every time parameter multiplied by `factor` (unit change).
    pub fn rescaled_time(&self, factor: f64) -> Self {
        match self {
            PumpSpectrum::Gaussian { tau_p } => PumpSpectrum::Gaussian {
                tau_p: tau_p * factor,
            },
            PumpSpectrum::Rectangular { tau_p } => PumpSpectrum::Rectangular {
                tau_p: tau_p * factor,
            },
            PumpSpectrum::Shaped { base, coeffs } => PumpSpectrum::Shaped {
                base: Box::new(base.rescaled_time(factor)),
                coeffs: coeffs
                    .iter()
                    .map(|c| CosineTerm {
                        b: c.b,
                        beta: c.beta * factor,
                    })
                    .collect(),
            },
            PumpSpectrum::DelayComb { base, b0, terms } => PumpSpectrum::DelayComb {
                base: Box::new(base.rescaled_time(factor)),
                b0: *b0,
                terms: terms
                    .iter()
                    .map(|t| DelayTerm {
                        b: t.b,
                        t: t.t * factor,
                    })
                    .collect(),
            },
        }
    }

    /// Frequency half-width beyond which the envelope is considered negligible:
    /// six inverse pulse durations, infinite for a flat spectrum.
    pub fn support(&self) -> f64 {
        match self {
            PumpSpectrum::Gaussian { tau_p } | PumpSpectrum::Rectangular { tau_p } => {
                if *tau_p > 0.0 {
                    6.0 / tau_p
                } else {
                    f64::INFINITY
                }
            }
            PumpSpectrum::Shaped { base, .. } | PumpSpectrum::DelayComb { base, .. } => base.support(),
        }
    }
}

fn check_distinct(values: impl Iterator<Item = f64>, min: f64, what: &str) -> Result<()> {
    let mut seen: Vec<f64> = Vec::new();
    for v in values {
        if !v.is_finite() || v < min {
            return Err(Error::invalid(format!("{what} values must be finite and >= {min}, got {v}")));
        }
        if seen.contains(&v) {
            return Err(Error::invalid(format!("{what} values must be distinct, {v} repeats")));
        }
        seen.push(v);
    }
    Ok(())
}

/// Pump spectrum evaluation; see [`PumpSpectrum::eval`].
pub fn eval_spectrum(p: &PumpSpectrum, omega: f64) -> f64 {
    p.eval(omega)
}

/// Truncated cosine series of a rectangular-pulse spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectSeries {
    /// `b_n cos(β_n ω)` terms with `β_n = 2πn/L`, `n = 0..=n_max`.
    pub terms: Vec<CosineTerm>,
    /// RMS reconstruction error over `[-L/2, L/2]`, relative to the peak value 1.
    pub rms_error: f64,
    /// `rms_error <= 1%`.
    pub within_tolerance: bool,
}

pub const RECT_SERIES_TOLERANCE: f64 = 0.01;

/// Cosine-series coefficients of `sinc(τ_p ω)` on the window `[-L/2, L/2]`.
///
/// With `∫_{-A}^{A} sin(kω)/ω dω = 2 Si(kA)` the coefficients are closed form:
/// `b_0 = 2 Si(τL/2) / (τL)` and
/// `b_n = 2 [Si((τ+β_n)L/2) + Si((τ-β_n)L/2)] / (τL)`.
pub fn rect_fourier_coeffs(tau_p: f64, period_l: f64, n_max: usize) -> Result<RectSeries> {
    if !(tau_p > 0.0 && tau_p.is_finite()) {
        return Err(Error::invalid(format!("tau_p must be positive, got {tau_p}")));
    }
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    if !(period_l * tau_p > 2.0 * std::f64::consts::PI) {
        return Err(Error::invalid(format!(
            "window L = {period_l} must exceed the central lobe 2π/τ_p = {}",
            2.0 * std::f64::consts::PI / tau_p
        )));
    }
    let half = 0.5 * period_l;
    let norm = 2.0 / (tau_p * period_l);
    let terms: Vec<CosineTerm> = (0..=n_max)
        .map(|n| {
            let beta = 2.0 * std::f64::consts::PI * n as f64 / period_l;
            let b = if n == 0 {
                norm * sine_integral(tau_p * half)
            } else {
                norm * (sine_integral((tau_p + beta) * half) + sine_integral((tau_p - beta) * half))
            };
            CosineTerm { b, beta }
        })
        .collect();

    const SAMPLES: usize = 4001;
    let sq: f64 = (0..SAMPLES)
        .map(|i| {
            let w = -half + period_l * i as f64 / (SAMPLES - 1) as f64;
            let approx: f64 = terms.iter().map(|t| t.b * (t.beta * w).cos()).sum();
            (approx - sinc(tau_p * w)).powi(2)
        })
        .sum();
    let rms_error = (sq / SAMPLES as f64).sqrt();
    Ok(RectSeries {
        terms,
        rms_error,
        within_tolerance: rms_error <= RECT_SERIES_TOLERANCE,
    })
}
