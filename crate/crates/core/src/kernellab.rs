//! Interaction kernels `K(x, x')` sampled on quadrature axes.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{make_uniform_axis, sinc, sine_integral, Axis, SymMatrix};
use crate::pumps::PumpSpectrum;

/// One harmonic `b cos(beta u)` of a modulated subkernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub b: f64,
    pub beta: f64,
}

impl Harmonic {
    pub const fn new(b: f64, beta: f64) -> Self {
        Harmonic { b, beta }
    }
}

/// Factorized kernel `K(x, x') = K₊(x + x') K₋(x − x')` with
/// `K±(u) = exp(−σ±² u² / 2) Σ b cos(β u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatedKernelSpec {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub plus_terms: Vec<Harmonic>,
    pub minus_terms: Vec<Harmonic>,
}

/// Margin in `β² ≥ MARGIN · 8σ²` used for the advisory validity flag.
pub const VALIDITY_MARGIN: f64 = 10.0;

impl ModulatedKernelSpec {
    pub fn new(
        sigma_plus: f64,
        sigma_minus: f64,
        plus_terms: Vec<Harmonic>,
        minus_terms: Vec<Harmonic>,
    ) -> Result<Self> {
        let spec = ModulatedKernelSpec {
            sigma_plus,
            sigma_minus,
            plus_terms,
            minus_terms,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Equal widths along `x + x'` and `x − x'`.
    pub fn symmetric(sigma: f64, plus_terms: Vec<Harmonic>, minus_terms: Vec<Harmonic>) -> Result<Self> {
        Self::new(sigma, sigma, plus_terms, minus_terms)
    }

    /// Unmodulated Gaussian `exp(−σ²(x² + x'²))`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::symmetric(sigma, vec![Harmonic::new(1.0, 0.0)], vec![Harmonic::new(1.0, 0.0)])
    }

    /// Harmonics at `β_n = n · spacing`, `n = 0..amps.len()`.
    pub fn harmonic_ladder(amps: &[f64], spacing: f64) -> Vec<Harmonic> {
        amps.iter()
            .enumerate()
            .map(|(n, &b)| Harmonic::new(b, n as f64 * spacing))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("sigma_plus", self.sigma_plus), ("sigma_minus", self.sigma_minus)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {s}")));
            }
        }
        for (name, terms) in [("plus_terms", &self.plus_terms), ("minus_terms", &self.minus_terms)] {
            let first = terms
                .first()
                .ok_or_else(|| Error::invalid(format!("{name} needs at least one term")))?;
            if first.beta != 0.0 {
                return Err(Error::invalid(format!("{name}: first term must have beta = 0")));
            }
            if terms.iter().any(|t| !t.b.is_finite() || !t.beta.is_finite()) {
                return Err(Error::invalid(format!("{name}: non-finite term")));
            }
            if terms.windows(2).any(|w| w[1].beta <= w[0].beta) {
                return Err(Error::invalid(format!(
                    "{name}: beta values must be distinct and sorted ascending"
                )));
            }
        }
        Ok(())
    }

    /// Whether every nonzero `β` satisfies `β² ≥ 10 · 8σ²` on its own axis.
    /// Outside this regime the analytic spectrum is only indicative.
    pub fn is_valid_regime(&self) -> bool {
        let ok = |terms: &[Harmonic], sigma: f64| {
            terms
                .iter()
                .filter(|t| t.beta != 0.0)
                .all(|t| t.beta * t.beta >= VALIDITY_MARGIN * 8.0 * sigma * sigma)
        };
        ok(&self.plus_terms, self.sigma_plus) && ok(&self.minus_terms, self.sigma_minus)
    }

    /// Whether the carrier frequencies `|β⁺_i ± β⁻_j|` of different harmonic
    /// pairs stay at least `√(10·8)·τ` apart, `τ = √(σ₊σ₋)`. Coinciding
    /// carriers (e.g. identical ladders on both sides) make the closed-form
    /// modes linearly dependent and the analytic spectrum meaningless.
    pub fn harmonics_resolved(&self) -> bool {
        let tau = (self.sigma_plus * self.sigma_minus).sqrt();
        let min_gap = (VALIDITY_MARGIN * 8.0).sqrt() * tau;
        let mut carriers = Vec::new();
        for (i, p) in self.plus_terms.iter().enumerate() {
            for (j, m) in self.minus_terms.iter().enumerate() {
                carriers.push(((i, j), p.beta + m.beta));
                carriers.push(((i, j), (p.beta - m.beta).abs()));
            }
        }
        carriers.iter().enumerate().all(|(a, (la, fa))| {
            carriers[a + 1..]
                .iter()
                .all(|(lb, fb)| la == lb || (fa - fb).abs() >= min_gap)
        })
    }

    pub fn k_plus(&self, u: f64) -> f64 {
        subkernel(self.sigma_plus, &self.plus_terms, u)
    }

    pub fn k_minus(&self, u: f64) -> f64 {
        subkernel(self.sigma_minus, &self.minus_terms, u)
    }

    pub fn eval(&self, x: f64, xp: f64) -> f64 {
        self.k_plus(x + xp) * self.k_minus(x - xp)
    }

    /// Smallest axis half-span accepted by [`build_modulated`].
    pub fn required_half_span(&self) -> f64 {
        4.0 / self.sigma_plus.min(self.sigma_minus)
    }

    /// Uniform axis of `n` points with half-span `6 / min(σ₊, σ₋)`.
    pub fn default_axis(&self, n: usize) -> Result<Axis> {
        make_uniform_axis(1.5 * self.required_half_span(), n)
    }
}

fn subkernel(sigma: f64, terms: &[Harmonic], u: f64) -> f64 {
    let envelope = (-0.5 * sigma * sigma * u * u).exp();
    envelope * terms.iter().map(|t| t.b * (t.beta * u).cos()).sum::<f64>()
}

/// Temporal phase-matching configuration. Times are in the same unit as
/// the inverse of the frequency axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalCrystal {
    pub tau1: f64,
    #[serde(default)]
    pub phi_quadratic: f64,
    /// Crystal mid-planes in units of the crystal length.
    #[serde(default)]
    pub crystal_offsets: Vec<f64>,
    /// Mid-plane distances of symmetric crystal pairs, in crystal lengths.
    #[serde(default)]
    pub symmetric_pair_distances: Option<Vec<f64>>,
}

impl TemporalCrystal {
    pub fn single(tau1: f64) -> Self {
        TemporalCrystal {
            tau1,
            phi_quadratic: 0.0,
            crystal_offsets: Vec::new(),
            symmetric_pair_distances: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0 && self.tau1.is_finite()) {
            return Err(Error::invalid(format!("tau1 must be positive, got {}", self.tau1)));
        }
        if !self.phi_quadratic.is_finite() {
            return Err(Error::invalid("phi_quadratic must be finite"));
        }
        if self.crystal_offsets.iter().any(|z| !z.is_finite()) {
            return Err(Error::invalid("crystal offsets must be finite"));
        }
        if let Some(d) = &self.symmetric_pair_distances {
            if !self.crystal_offsets.is_empty() {
                return Err(Error::invalid(
                    "set either crystal_offsets or symmetric_pair_distances, not both",
                ));
            }
            if d.is_empty() || d.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("pair distances must be a non-empty list of finite values"));
            }
        }
        if !self.crystal_offsets.is_empty() {
            // D is real only when every crystal has a mirror partner.
            let mut sorted = self.crystal_offsets.clone();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            let scale = sorted.iter().fold(1.0f64, |m, z| m.max(z.abs()));
            if (0..n).any(|i| (sorted[i] + sorted[n - 1 - i]).abs() > 1e-12 * scale) {
                return Err(Error::invalid(
                    "crystal offsets must be symmetric about z = 0 for a real kernel",
                ));
            }
        }
        Ok(())
    }

    /// Phase mismatch `Φ` as a function of `s = ω + ω'`.
    pub fn phi(&self, s: f64) -> f64 {
        self.tau1 * s + self.phi_quadratic * s * s
    }

    /// Phase-matching function `D(ω, ω')` as a function of `s = ω + ω'`.
    pub fn phase_matching(&self, s: f64) -> f64 {
        let phi = self.phi(s);
        let envelope = sinc(phi);
        if let Some(d) = &self.symmetric_pair_distances {
            2.0 * d.iter().map(|dn| (dn * phi).cos()).sum::<f64>() * envelope
        } else if !self.crystal_offsets.is_empty() {
            self.crystal_offsets
                .iter()
                .map(|z| (2.0 * z * phi).cos())
                .sum::<f64>()
                * envelope
        } else {
            envelope
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialCrystal {
    pub coherence_length: f64,
}

impl SpatialCrystal {
    pub fn new(coherence_length: f64) -> Result<Self> {
        if !(coherence_length > 0.0 && coherence_length.is_finite()) {
            return Err(Error::invalid(format!(
                "coherence length must be positive, got {coherence_length}"
            )));
        }
        Ok(SpatialCrystal { coherence_length })
    }

    /// Diffraction function `Δ(r) = [π/2 − Si((r/l)²)] / (π l²)`.
    pub fn diffraction(&self, r: f64) -> f64 {
        let l = self.coherence_length;
        let q = r / l;
        (0.5 * PI - sine_integral(q * q)) / (PI * l * l)
    }
}

/// What a [`KernelMatrix`] was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Modulated { spec: ModulatedKernelSpec },
    Temporal { crystal: TemporalCrystal, pump: PumpSpectrum },
    SpatialCut { crystal: SpatialCrystal },
    RealisticSpopo { tau1: f64, pump: PumpSpectrum },
    Custom { description: String },
}

/// A kernel sampled on an axis; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelMatrix {
    axis: Axis,
    values: SymMatrix,
    provenance: Provenance,
}

impl KernelMatrix {
    /// Wrap externally computed samples. `values` must match the axis length
    /// and be finite.
    pub fn from_parts(axis: Axis, values: SymMatrix, provenance: Provenance) -> Result<Self> {
        if values.dim() != axis.len() {
            return Err(Error::invalid(format!(
                "kernel is {}x{} but the axis has {} points",
                values.dim(),
                values.dim(),
                axis.len()
            )));
        }
        if !values.is_finite() {
            return Err(Error::Numerical("kernel has non-finite entries".into()));
        }
        Ok(KernelMatrix {
            axis,
            values,
            provenance,
        })
    }

    /// Sample `f(x, x')` on the upper triangle and mirror.
    pub fn from_kernel_fn(axis: Axis, provenance: Provenance, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let pts = axis.points().to_vec();
        let values = SymMatrix::from_fn(pts.len(), |i, j| f(pts[i], pts[j]));
        Self::from_parts(axis, values, provenance)
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn values(&self) -> &SymMatrix {
        &self.values
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    /// CSV dump: a header row of axis points, then one row per `x` with the
    /// sample point in the first column. Every `stride`-th point is kept.
    pub fn write_csv<W: Write>(&self, out: W, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        let idx: Vec<usize> = (0..self.dim()).step_by(stride).collect();
        let pts = self.axis.points();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![format!("{}\\{}'", self.axis.label(), self.axis.label())];
        header.extend(idx.iter().map(|&j| format!("{:e}", pts[j])));
        w.write_record(&header).map_err(csv_error)?;
        for &i in &idx {
            let mut row = vec![format!("{:e}", pts[i])];
            row.extend(idx.iter().map(|&j| format!("{:e}", self.values.get(i, j))));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numerical(format!("csv: {other:?}")),
    }
}

pub fn build_modulated(spec: &ModulatedKernelSpec, axis: &Axis) -> Result<KernelMatrix> {
    spec.validate()?;
    let required = spec.required_half_span();
    let actual = axis.half_span();
    if actual < required * (1.0 - 1e-12) {
        return Err(Error::AxisTooNarrow { required, actual });
    }
    KernelMatrix::from_kernel_fn(
        axis.clone(),
        Provenance::Modulated { spec: spec.clone() },
        |x, xp| spec.eval(x, xp),
    )
}

/// `K(ω, ω') = α_p(ω + ω') D(ω, ω')`.
pub fn build_temporal(crystal: &TemporalCrystal, pump: &PumpSpectrum, axis: &Axis) -> Result<KernelMatrix> {
    crystal.validate()?;
    pump.validate()?;
    KernelMatrix::from_kernel_fn(
        axis.clone(),
        Provenance::Temporal {
            crystal: crystal.clone(),
            pump: pump.clone(),
        },
        |w, wp| {
            let s = w + wp;
            pump.eval(s) * crystal.phase_matching(s)
        },
    )
}

/// One-dimensional transverse cut `K(x, x') = α_p((x + x')/2) Δ(x − x')`.
pub fn build_spatial_cut(
    crystal: &SpatialCrystal,
    pump_profile: impl Fn(f64) -> f64,
    axis: &Axis,
) -> Result<KernelMatrix> {
    let crystal = SpatialCrystal::new(crystal.coherence_length)?;
    KernelMatrix::from_kernel_fn(axis.clone(), Provenance::SpatialCut { crystal }, |x, xp| {
        pump_profile(0.5 * (x + xp)) * crystal.diffraction(x - xp)
    })
}

/// Group-delay mismatch of a 100 µm BIBO crystal, in femtoseconds.
pub const DEFAULT_TAU1_FS: f64 = 20.0;

/// Single-crystal SPOPO kernel with first-order mismatch.
///
/// `tau1` and the pump's time parameters share one unit (fs by convention).
/// The result lives on a frequency axis in units of `1/tau1`, with half-span
/// `6 · max(1, tau1/τ_p)` covering both the crystal acceptance and the pump.
pub fn realistic_spopo_kernel(tau1: f64, pump: &PumpSpectrum, n_points: usize) -> Result<KernelMatrix> {
    if !(tau1 > 0.0 && tau1.is_finite()) {
        return Err(Error::invalid(format!("tau1 must be positive, got {tau1}")));
    }
    pump.validate()?;
    let scaled = pump.rescaled_time(1.0 / tau1);
    let half_span = 6.0f64.max(scaled.support().min(f64::MAX));
    let half_span = if half_span.is_finite() { half_span } else { 6.0 };
    let axis = make_uniform_axis(half_span, n_points)?;
    let crystal = TemporalCrystal::single(1.0);
    let k = build_temporal(&crystal, &scaled, &axis)?;
    Ok(KernelMatrix {
        provenance: Provenance::RealisticSpopo {
            tau1,
            pump: pump.clone(),
        },
        ..k
    })
}

/// Width `σ₊` of the Gaussian that approximates `α_p(s) sinc(τ₁ s)` for a
/// Gaussian pump. The sinc is matched by curvature at the origin,
/// `sinc(Φ) ≈ exp(−Φ²/6)`.
pub fn gaussian_sigma_plus(tau1: f64, tau_p: f64) -> f64 {
    (tau_p * tau_p + tau1 * tau1 / 3.0).sqrt()
}
