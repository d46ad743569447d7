//! Transverse OPO tuned to one Laguerre-Gauss family.
//!
//! Lengths are in units of the signal spot size `w_s` unless stated. The pump
//! profile is `α_p(r) = w_s Σ c_k G_{ρ_k}(r)` with
//! `G_ρ(r) = √(2/π) e^{−r²/w_p²} / w_p` and `w_p = ρ w_s`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernellab::csv_error;
use crate::numerics::quadrature::GaussLaguerre;
use crate::numerics::{condition_number, laguerre_assoc, make_uniform_axis, solve_linear};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LGFamily {
    pub f: usize,
    #[serde(default = "unit")]
    pub w_s: f64,
}

fn unit() -> f64 {
    1.0
}

impl LGFamily {
    pub fn new(f: usize) -> Self {
        LGFamily { f, w_s: 1.0 }
    }

    pub fn with_spot_size(f: usize, w_s: f64) -> Result<Self> {
        let fam = LGFamily { f, w_s };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_s > 0.0 && self.w_s.is_finite()) {
            return Err(Error::invalid(format!("spot size must be positive, got {}", self.w_s)));
        }
        Ok(())
    }

    pub fn l0(&self) -> usize {
        self.f % 2
    }

    /// `l₀, l₀ + 2, …, f`.
    pub fn l_values(&self) -> Vec<usize> {
        (self.l0()..=self.f).step_by(2).collect()
    }

    pub fn contains(&self, l: usize) -> bool {
        l <= self.f && l % 2 == self.f % 2
    }

    /// Radial index `p = (f − l)/2`.
    pub fn radial_index(&self, l: usize) -> Result<usize> {
        if !self.contains(l) {
            return Err(Error::invalid(format!(
                "l = {l} is not in family f = {} (allowed: {:?})",
                self.f,
                self.l_values()
            )));
        }
        Ok((self.f - l) / 2)
    }

    /// `f + 1`: one cosine and one sine mode per `l > 0`, one mode for `l = 0`.
    pub fn mode_count(&self) -> usize {
        self.l_values().iter().map(|&l| if l == 0 { 1 } else { 2 }).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussComponent {
    pub amplitude: f64,
    /// Spot-size ratio `w_p / w_s`.
    pub rho: f64,
}

/// Superposition of concentric TEM00 pump beams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiGaussPump {
    pub components: Vec<GaussComponent>,
}

impl MultiGaussPump {
    pub fn new(components: Vec<GaussComponent>) -> Result<Self> {
        let p = MultiGaussPump { components };
        p.validate()?;
        Ok(p)
    }

    pub fn single(rho: f64) -> Result<Self> {
        Self::new(vec![GaussComponent { amplitude: 1.0, rho }])
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("pump needs at least one Gaussian component"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.rho > 0.0 && c.rho.is_finite()) || !c.amplitude.is_finite() {
                return Err(Error::invalid(format!(
                    "component {i}: rho must be positive and amplitude finite"
                )));
            }
            if self.components[..i].iter().any(|o| o.rho == c.rho) {
                return Err(Error::invalid(format!("component {i}: rho = {} repeats", c.rho)));
            }
        }
        Ok(())
    }

    /// `α_p(r)` for signal spot size `w_s`.
    pub fn eval(&self, r: f64, w_s: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let wp = c.rho * w_s;
                w_s * c.amplitude * (2.0 / PI).sqrt() / wp * (-(r * r) / (wp * wp)).exp()
            })
            .sum()
    }
}

/// `R_p^l(r) = √(2p!/(π(p+l)!)) (1/w) (√2 r/w)^l L_p^l(2r²/w²) e^{−r²/w²}`.
pub fn lg_radial(p: usize, l: usize, w: f64, r: f64) -> f64 {
    let x = 2.0 * r * r / (w * w);
    radial_norm(p, l, w) * x.sqrt().powi(l as i32) * laguerre_assoc(p, l, x) * (-0.5 * x).exp()
}

/// `√(2p!/(π(p+l)!)) / w`, with the factorial ratio as a product.
fn radial_norm(p: usize, l: usize, w: f64) -> f64 {
    let ratio: f64 = ((p + 1)..=(p + l)).map(|k| 1.0 / k as f64).product();
    (2.0 * ratio / PI).sqrt() / w
}

fn laguerre_rule(f: usize) -> Result<GaussLaguerre> {
    // R² times a Gaussian is a degree-f polynomial in u = r² times e^{−a u}.
    const CACHED: usize = 24;
    static RULE: OnceLock<GaussLaguerre> = OnceLock::new();
    if f < 2 * CACHED {
        if let Some(rule) = RULE.get() {
            return Ok(rule.clone());
        }
        let rule = GaussLaguerre::new(CACHED)?;
        Ok(RULE.get_or_init(|| rule).clone())
    } else {
        GaussLaguerre::new(f / 2 + 1)
    }
}

/// `2π ∫ r α(r) R²(r) dr` for a single unit-amplitude pump beam.
fn chi_component(fam: &LGFamily, p: usize, l: usize, rho: f64, rule: &GaussLaguerre) -> f64 {
    let w = fam.w_s;
    let wp = rho * w;
    let norm = radial_norm(p, l, w);
    let rate = 2.0 / (w * w) + 1.0 / (wp * wp);
    // r dr = du/2 with u = r²
    let poly = |u: f64| {
        let x = 2.0 * u / (w * w);
        let radial = norm * x.powi(l as i32 / 2) * if l % 2 == 1 { x.sqrt() } else { 1.0 } * laguerre_assoc(p, l, x);
        radial * radial
    };
    let prefactor = 2.0 * PI * 0.5 * w * (2.0 / PI).sqrt() / wp;
    prefactor * rule.integrate(rate, poly)
}

/// Coupling `χ_l = 2π ∫ r α_p(r) [R_p^l(r)]² dr`, `p = (f − l)/2`.
pub fn chi_overlap(fam: &LGFamily, l: usize, pump: &MultiGaussPump) -> Result<f64> {
    fam.validate()?;
    pump.validate()?;
    let p = fam.radial_index(l)?;
    let rule = laguerre_rule(fam.f)?;
    Ok(pump
        .components
        .iter()
        .map(|c| c.amplitude * chi_component(fam, p, l, c.rho, &rule))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiEntry {
    pub l: usize,
    pub re: f64,
    /// Zero for the real cylindrically symmetric pumps modeled here.
    pub im: f64,
}

impl ChiEntry {
    pub fn phase(&self) -> f64 {
        self.im.atan2(self.re)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSet {
    pub family: LGFamily,
    /// One entry per `l` in the family, ascending.
    pub entries: Vec<ChiEntry>,
}

impl ChiSet {
    pub fn get(&self, l: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.l == l).map(|e| e.re)
    }
}

pub fn chi_set(fam: &LGFamily, pump: &MultiGaussPump) -> Result<ChiSet> {
    let entries = fam
        .l_values()
        .into_iter()
        .map(|l| Ok(ChiEntry { l, re: chi_overlap(fam, l, pump)?, im: 0.0 }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChiSet { family: *fam, entries })
}

/// `r_l = χ_l / χ_{l₀}` for every `l` in the family.
pub fn chi_ratios(fam: &LGFamily, pump: &MultiGaussPump) -> Result<BTreeMap<usize, f64>> {
    let set = chi_set(fam, pump)?;
    let reference = set.entries[0].re;
    let scale = set.entries.iter().map(|e| e.re.abs()).fold(0.0f64, f64::max);
    if scale == 0.0 || reference.abs() <= 1e-12 * scale {
        return Err(Error::ZeroReference);
    }
    Ok(set.entries.iter().map(|e| (e.l, e.re / reference)).collect())
}

/// Spot-size ratio of the doubly resonant reference configuration.
pub const REFERENCE_RHO: f64 = FRAC_1_SQRT_2;

/// Threshold pump power relative to `ρ = 1/√2`: `χ_{l₀}²(1/√2) / χ_{l₀}²(ρ)`.
pub fn threshold_ratio(fam: &LGFamily, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    let l0 = fam.l0();
    let at = |r: f64| chi_overlap(fam, l0, &MultiGaussPump::single(r)?);
    Ok((at(REFERENCE_RHO)? / at(rho)?).powi(2))
}

fn check_pair(rho_a: f64, rho_b: f64) -> Result<()> {
    for r in [rho_a, rho_b] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("spot-size ratios must be positive, got {r}")));
        }
    }
    if (rho_a - rho_b).abs() <= 1e-12 * rho_a.max(rho_b) {
        return Err(Error::DegeneratePump(rho_a, rho_b));
    }
    Ok(())
}

fn mixing_angle(rho_a: f64, rho_b: f64, c: f64) -> Result<f64> {
    check_pair(rho_a, rho_b)?;
    let (a2, b2) = (rho_a * rho_a, rho_b * rho_b);
    let tan = (rho_a / rho_b).powi(3) * ((1.0 + 2.0 * b2) / (1.0 + 2.0 * a2)).powi(4) * (1.0 + c * a2 * a2)
        / (1.0 + c * b2 * b2);
    Ok(tan.atan())
}

/// Angle for which `w_s[G_a cos θ − G_b sin θ]` gives `χ₁ = −χ₃` in family 3.
pub fn mixing_angle_opposite(rho_a: f64, rho_b: f64) -> Result<f64> {
    mixing_angle(rho_a, rho_b, 4.0)
}

/// Angle for which `w_s[G_a cos θ − G_b sin θ]` gives `χ₁ = 0` in family 3.
pub fn mixing_angle_null(rho_a: f64, rho_b: f64) -> Result<f64> {
    mixing_angle(rho_a, rho_b, 2.0)
}

/// The two-beam pump `G_a cos θ − G_b sin θ`.
pub fn mixed_pump(rho_a: f64, rho_b: f64, theta: f64) -> Result<MultiGaussPump> {
    check_pair(rho_a, rho_b)?;
    MultiGaussPump::new(vec![
        GaussComponent { amplitude: theta.cos(), rho: rho_a },
        GaussComponent { amplitude: -theta.sin(), rho: rho_b },
    ])
}

/// Condition number above which the amplitude system counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Synthesis {
    pub pump: MultiGaussPump,
    pub condition: f64,
}

/// Beam amplitudes `c_k` (one beam per `ρ_k`) such that `χ_l = t_l`.
///
/// Needs one `ρ` per `l` in the family; `targets` must name every `l`.
pub fn synthesize_chi_targets(fam: &LGFamily, targets: &BTreeMap<usize, f64>, rhos: &[f64]) -> Result<Synthesis> {
    let ls = fam.l_values();
    if rhos.len() != ls.len() {
        return Err(Error::invalid(format!(
            "family f = {} needs {} spot-size ratios, got {}",
            fam.f,
            ls.len(),
            rhos.len()
        )));
    }
    if targets.len() != ls.len() || ls.iter().any(|l| !targets.contains_key(l)) {
        return Err(Error::invalid(format!("targets must give exactly the l values {ls:?}")));
    }
    // validates ρ distinct and positive
    MultiGaussPump::new(rhos.iter().map(|&rho| GaussComponent { amplitude: 1.0, rho }).collect())?;
    let mut rows = Vec::with_capacity(ls.len());
    for &l in &ls {
        let row = rhos
            .iter()
            .map(|&rho| chi_overlap(fam, l, &MultiGaussPump::single(rho)?))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let condition = condition_number(&rows)?;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let rhs: Vec<f64> = ls.iter().map(|l| targets[l]).collect();
    let amps = solve_linear(&rows, &rhs)?;
    let pump = MultiGaussPump::new(
        amps.into_iter()
            .zip(rhos)
            .map(|(amplitude, &rho)| GaussComponent { amplitude, rho })
            .collect(),
    )?;
    Ok(Synthesis { pump, condition })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub ratios: BTreeMap<usize, f64>,
    pub r_th: f64,
}

/// Coupling ratios and threshold ratio for a single Gaussian pump at each `ρ`.
pub fn ratio_sweep(fam: &LGFamily, rhos: &[f64]) -> Result<Vec<SweepRow>> {
    rhos.iter()
        .map(|&rho| {
            Ok(SweepRow {
                rho,
                ratios: chi_ratios(fam, &MultiGaussPump::single(rho)?)?,
                r_th: threshold_ratio(fam, rho)?,
            })
        })
        .collect()
}

/// CSV columns `rho, r_<l>…, r_th`.
pub fn write_sweep_csv<W: Write>(fam: &LGFamily, rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ls = fam.l_values();
    let mut header = vec!["rho".to_string()];
    header.extend(ls.iter().map(|l| format!("r_{l}")));
    header.push("r_th".into());
    w.write_record(&header).map_err(csv_error)?;
    for row in rows {
        let mut rec = vec![format!("{:e}", row.rho)];
        rec.extend(ls.iter().map(|l| format!("{:e}", row.ratios[l])));
        rec.push(format!("{:e}", row.r_th));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Square Cartesian grid, symmetric about the origin, with uniform weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2d {
    coords: Vec<f64>,
    weight: f64,
}

impl Grid2d {
    /// `n × n` points on `[-half, half]²`.
    pub fn symmetric(half: f64, n: usize) -> Result<Self> {
        let axis = make_uniform_axis(half, n)?;
        let h = axis.weights()[0];
        Ok(Grid2d {
            coords: axis.points().to_vec(),
            weight: h * h,
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Number of samples, `n²`. Sample `i·n + j` sits at `(x_i, y_j)`.
    pub fn len(&self) -> usize {
        self.coords.len() * self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.coords
            .iter()
            .flat_map(move |&x| self.coords.iter().map(move |&y| (x, y)))
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weight * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    /// Header row of `y`, then `x` followed by the values along `y`.
    pub fn write_csv<W: Write>(&self, values: &[f64], out: W) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::invalid("field size does not match the grid"));
        }
        let n = self.coords.len();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x\\y".to_string()];
        header.extend(self.coords.iter().map(|y| format!("{y:e}")));
        w.write_record(&header).map_err(csv_error)?;
        for (i, x) in self.coords.iter().enumerate() {
            let mut rec = vec![format!("{x:e}")];
            rec.extend(values[i * n..(i + 1) * n].iter().map(|v| format!("{v:e}")));
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HybridKind {
    /// `cos lφ`
    C,
    /// `sin lφ`
    S,
}

/// Hybrid mode `R_p^l(r) cos lφ` (or `sin lφ`), normalized on `grid`.
pub fn hybrid_mode_profile(fam: &LGFamily, l: usize, kind: HybridKind, grid: &Grid2d) -> Result<Vec<f64>> {
    fam.validate()?;
    let p = fam.radial_index(l)?;
    if kind == HybridKind::S && l == 0 {
        return Err(Error::invalid("l = 0 has no sine-type hybrid mode"));
    }
    let raw: Vec<f64> = grid
        .points()
        .map(|(x, y)| {
            let r = x.hypot(y);
            let phi = y.atan2(x);
            let angular = match kind {
                HybridKind::C => (l as f64 * phi).cos(),
                HybridKind::S => (l as f64 * phi).sin(),
            };
            lg_radial(p, l, fam.w_s, r) * angular
        })
        .collect();
    let norm = grid.inner(&raw, &raw).sqrt();
    if norm == 0.0 {
        return Err(Error::Numerical("grid too coarse to resolve the mode".into()));
    }
    Ok(raw.into_iter().map(|v| v / norm).collect())
}

/// All `f + 1` hybrid modes ordered `C_{l₀}, S_{l₀} (l₀ > 0), C_{l₀+2}, S_{l₀+2}, …`.
pub fn hybrid_modes(fam: &LGFamily, grid: &Grid2d) -> Result<Vec<(usize, HybridKind, Vec<f64>)>> {
    let mut out = Vec::with_capacity(fam.mode_count());
    for l in fam.l_values() {
        out.push((l, HybridKind::C, hybrid_mode_profile(fam, l, HybridKind::C, grid)?));
        if l > 0 {
            out.push((l, HybridKind::S, hybrid_mode_profile(fam, l, HybridKind::S, grid)?));
        }
    }
    Ok(out)
}
