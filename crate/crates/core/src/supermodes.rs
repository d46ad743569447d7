//! Supermodes: eigenfunctions of the kernel's integral operator, numeric and
//! closed-form.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernellab::{csv_error, KernelMatrix, ModulatedKernelSpec};
use crate::numerics::{hermite, symmetric_eig, symmetric_eigenvalues, Axis, EigenOrder, SymMatrix};

pub const DEFAULT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Eigenvalues below `floor · |Λ₁|` are discarded.
    pub floor: f64,
    /// Skip eigenvectors when only the spectrum is needed.
    pub eigenfunctions: bool,
    /// Keep at most this many modes.
    pub max_modes: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            floor: DEFAULT_FLOOR,
            eigenfunctions: true,
            max_modes: None,
        }
    }
}

impl SolveOptions {
    pub fn eigenvalues_only() -> Self {
        SolveOptions {
            eigenfunctions: false,
            ..Self::default()
        }
    }
}

/// Eigenvalues sorted by `|Λ|` descending with weighted-orthonormal
/// eigenfunctions sampled on the kernel's axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermodeSet {
    axis: Axis,
    eigenvalues: Vec<f64>,
    /// Empty when solved without eigenfunctions.
    eigenfunctions: Vec<Vec<f64>>,
    truncation_floor: f64,
    /// Set when every eigenvalue fell below the floor.
    all_below_floor: bool,
}

impl SupermodeSet {
    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn has_eigenfunctions(&self) -> bool {
        !self.eigenfunctions.is_empty() || self.eigenvalues.is_empty()
    }

    pub fn eigenfunction(&self, n: usize) -> Option<&[f64]> {
        self.eigenfunctions.get(n).map(Vec::as_slice)
    }

    pub fn eigenfunctions(&self) -> &[Vec<f64>] {
        &self.eigenfunctions
    }

    pub fn truncation_floor(&self) -> f64 {
        self.truncation_floor
    }

    pub fn all_below_floor(&self) -> bool {
        self.all_below_floor
    }

    /// `|⟨s_n, f⟩| / ‖f‖` in the axis inner product.
    pub fn overlap(&self, n: usize, f: &[f64]) -> Option<f64> {
        self.subspace_overlap(&[n], f)
    }

    /// Norm of the projection of `f / ‖f‖` onto the span of the given modes.
    pub fn subspace_overlap(&self, modes: &[usize], f: &[f64]) -> Option<f64> {
        if f.len() != self.axis.len() {
            return None;
        }
        let norm = self.axis.inner(f, f).sqrt();
        if norm == 0.0 {
            return None;
        }
        let mut sq = 0.0;
        for &n in modes {
            let s = self.eigenfunction(n)?;
            sq += self.axis.inner(s, f).powi(2);
        }
        Some(sq.sqrt() / norm)
    }

    /// `index,eigenvalue` rows, 1-based.
    pub fn write_eigenvalues_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "eigenvalue"]).map_err(csv_error)?;
        for (i, v) in self.eigenvalues.iter().enumerate() {
            w.write_record([(i + 1).to_string(), format!("{v:e}")]).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Axis column followed by the first `n_modes` eigenfunctions, every
    /// `stride`-th sample.
    pub fn write_modes_csv<W: Write>(&self, out: W, n_modes: usize, stride: usize) -> Result<()> {
        let k = n_modes.min(self.eigenfunctions.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.axis.label().to_string()];
        header.extend((1..=k).map(|i| format!("s{i}")));
        w.write_record(&header).map_err(csv_error)?;
        for i in (0..self.axis.len()).step_by(stride.max(1)) {
            let mut row = vec![format!("{:e}", self.axis.points()[i])];
            row.extend(self.eigenfunctions[..k].iter().map(|s| format!("{:e}", s[i])));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn solve_fredholm(k: &KernelMatrix) -> Result<SupermodeSet> {
    solve_fredholm_with(k, &SolveOptions::default())
}

/// Discretize as `M_ij = √(w_i w_j) K(x_i, x_j)`, diagonalize, and map
/// eigenvectors back with `s(x_i) = v_i / √w_i`.
pub fn solve_fredholm_with(k: &KernelMatrix, opts: &SolveOptions) -> Result<SupermodeSet> {
    if !(0.0..1.0).contains(&opts.floor) {
        return Err(Error::invalid(format!("floor must lie in [0, 1), got {}", opts.floor)));
    }
    let axis = k.axis().clone();
    let sw: Vec<f64> = axis.weights().iter().map(|w| w.sqrt()).collect();
    let m = SymMatrix::from_fn(axis.len(), |i, j| sw[i] * sw[j] * k.get(i, j));

    let (values, vectors) = if opts.eigenfunctions {
        let eig = symmetric_eig(&m, EigenOrder::AbsDescending)?;
        let vecs: Vec<Vec<f64>> = eig
            .vectors()
            .map(|v| v.iter().zip(&sw).map(|(a, s)| a / s).collect())
            .collect();
        (eig.eigenvalues, vecs)
    } else {
        (symmetric_eigenvalues(&m, EigenOrder::AbsDescending)?, Vec::new())
    };

    let lead = values.first().map_or(0.0, |v| v.abs());
    let mut keep = if lead > 0.0 {
        values.iter().take_while(|v| v.abs() >= opts.floor * lead).count()
    } else {
        0
    };
    if let Some(cap) = opts.max_modes {
        keep = keep.min(cap);
    }
    let mut eigenfunctions = vectors;
    eigenfunctions.truncate(keep);
    Ok(SupermodeSet {
        axis,
        eigenvalues: values[..keep].to_vec(),
        eigenfunctions,
        truncation_floor: opts.floor,
        all_below_floor: lead == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Cos => x.cos(),
            Trig::Sin => x.sin(),
        }
    }
}

/// Analytic mode `e^{−τ²x²} t₁(β⁺_{n1} x) t₂(β⁻_{n2} x) H_m(√2 τ x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub n1: usize,
    pub n2: usize,
    pub m: usize,
    pub t1: Trig,
    pub t2: Trig,
}

impl ModeLabel {
    pub const fn new(n1: usize, n2: usize, m: usize, t1: Trig, t2: Trig) -> Self {
        ModeLabel { n1, n2, m, t1, t2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub value: f64,
    pub multiplicity: usize,
    /// One label per degenerate member.
    pub labels: Vec<ModeLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpectrum {
    /// Sorted by `|value|` descending, positive first on ties.
    pub entries: Vec<SpectrumEntry>,
    /// Whether every nonzero `β` satisfies `β² ≥ 10 · 8σ²`.
    pub valid: bool,
    /// Whether carriers of different harmonic pairs are distinguishable;
    /// see [`ModulatedKernelSpec::harmonics_resolved`].
    pub resolved: bool,
}

impl AnalyticSpectrum {
    pub fn total_count(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Every eigenvalue repeated by multiplicity, in entry order.
    pub fn values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat(e.value).take(e.multiplicity))
            .collect()
    }

    /// As [`values`](Self::values) without entries below `rel_floor · max|value|`.
    pub fn significant_values(&self, rel_floor: f64) -> Vec<f64> {
        let lead = self.entries.first().map_or(0.0, |e| e.value.abs());
        self.values()
            .into_iter()
            .filter(|v| lead > 0.0 && v.abs() > rel_floor * lead)
            .collect()
    }
}

/// Relative size below which the Hermite ladder is cut.
const LADDER_CUTOFF: f64 = 1e-9;

/// Closed-form spectrum of a modulated kernel.
///
/// Each harmonic pair `(n1, n2)` contributes `±w λ_m b⁺_{n1} b⁻_{n2}` with
/// `w = 2^{[n1=0] + [n2=0]}`, negative for the `sin` branch of `t₁`, and
/// `λ_m = (−1)^m √(π/2) / (2(σ₊+σ₋)) · ((σ₊−σ₋)/(σ₊+σ₋))^m`. With equal widths only
/// `m = 0` survives and `λ_0 = √(π/32σ²)`.
pub fn predict_modulated_spectrum(spec: &ModulatedKernelSpec) -> Result<AnalyticSpectrum> {
    spec.validate()?;
    let (sp, sm) = (spec.sigma_plus, spec.sigma_minus);
    let lambda0 = (PI / 2.0).sqrt() / (2.0 * (sp + sm));
    let q = (sp - sm) / (sp + sm);
    let rungs = if q == 0.0 {
        1
    } else {
        // |q|^m < cutoff
        (LADDER_CUTOFF.ln() / q.abs().ln()).ceil() as usize
    };
    let ladder: Vec<f64> = (0..rungs.max(1))
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * lambda0 * q.powi(m as i32)
        })
        .collect();

    let mut entries = Vec::new();
    for (n1, plus) in spec.plus_terms.iter().enumerate() {
        for (n2, minus) in spec.minus_terms.iter().enumerate() {
            let weight = if n1 == 0 { 2.0 } else { 1.0 } * if n2 == 0 { 2.0 } else { 1.0 };
            let t1s: &[Trig] = if n1 == 0 { &[Trig::Cos] } else { &[Trig::Cos, Trig::Sin] };
            let t2s: &[Trig] = if n2 == 0 { &[Trig::Cos] } else { &[Trig::Cos, Trig::Sin] };
            for (m, lam) in ladder.iter().enumerate() {
                for &t1 in t1s {
                    let sign = if t1 == Trig::Sin { -1.0 } else { 1.0 };
                    entries.push(SpectrumEntry {
                        value: sign * weight * lam * plus.b * minus.b,
                        multiplicity: t2s.len(),
                        labels: t2s.iter().map(|&t2| ModeLabel::new(n1, n2, m, t1, t2)).collect(),
                    });
                }
            }
        }
    }
    entries.sort_by(|a, b| b.value.abs().total_cmp(&a.value.abs()).then(b.value.total_cmp(&a.value)));
    Ok(AnalyticSpectrum {
        entries,
        valid: spec.is_valid_regime(),
        resolved: spec.harmonics_resolved(),
    })
}

/// Unnormalized analytic eigenfunction at `x`.
pub fn analytic_eigenfunction(spec: &ModulatedKernelSpec, label: ModeLabel, x: f64) -> Result<f64> {
    let plus = spec
        .plus_terms
        .get(label.n1)
        .ok_or_else(|| Error::invalid(format!("n1 = {} exceeds the plus terms", label.n1)))?;
    let minus = spec
        .minus_terms
        .get(label.n2)
        .ok_or_else(|| Error::invalid(format!("n2 = {} exceeds the minus terms", label.n2)))?;
    if (label.t1 == Trig::Sin && plus.beta == 0.0) || (label.t2 == Trig::Sin && minus.beta == 0.0) {
        return Err(Error::invalid("sin branch of a zero-frequency term vanishes identically"));
    }
    let tau = (spec.sigma_plus * spec.sigma_minus).sqrt();
    Ok((-tau * tau * x * x).exp()
        * label.t1.eval(plus.beta * x)
        * label.t2.eval(minus.beta * x)
        * hermite(label.m, std::f64::consts::SQRT_2 * tau * x))
}

/// Analytic mode sampled on `axis` and normalized in its inner product.
pub fn sampled_analytic_mode(spec: &ModulatedKernelSpec, label: ModeLabel, axis: &Axis) -> Result<Vec<f64>> {
    let raw = axis
        .points()
        .iter()
        .map(|&x| analytic_eigenfunction(spec, label, x))
        .collect::<Result<Vec<f64>>>()?;
    let norm = axis.inner(&raw, &raw).sqrt();
    if norm == 0.0 {
        return Err(Error::Numerical("analytic mode vanishes on the axis".into()));
    }
    Ok(raw.into_iter().map(|v| v / norm).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateGroup {
    /// Mean of the members (of their magnitudes for magnitude grouping).
    pub value: f64,
    pub count: usize,
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol <= 0.1) {
        return Err(Error::invalid(format!("rel_tol must lie in (0, 0.1], got {rel_tol}")));
    }
    Ok(())
}

/// Signed clustering: members of a group share a sign and differ pairwise by
/// at most `rel_tol` relative to the larger magnitude.
pub fn group_degeneracies(s: &SupermodeSet, rel_tol: f64) -> Result<Vec<DegenerateGroup>> {
    group_values(s.eigenvalues(), rel_tol)
}

pub fn group_values(values: &[f64], rel_tol: f64) -> Result<Vec<DegenerateGroup>> {
    check_tol(rel_tol)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut groups = cluster_sorted(&sorted, rel_tol);
    groups.sort_by(|a, b| b.value.abs().total_cmp(&a.value.abs()).then(b.value.total_cmp(&a.value)));
    Ok(groups)
}

/// Clustering of `|Λ|`, for spectra whose eigenvalues alternate in sign.
pub fn group_magnitudes(values: &[f64], rel_tol: f64) -> Result<Vec<DegenerateGroup>> {
    check_tol(rel_tol)?;
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(cluster_sorted(&mags, rel_tol))
}

/// Input sorted descending; each group is closed once a value strays more
/// than `rel_tol` from the group's first member.
fn cluster_sorted(sorted: &[f64], rel_tol: f64) -> Vec<DegenerateGroup> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let head = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() {
            let v = sorted[j];
            let scale = head.abs().max(v.abs());
            let same_sign = head.signum() == v.signum() || scale == 0.0;
            if !same_sign || (head - v).abs() > rel_tol * scale {
                break;
            }
            j += 1;
        }
        let members = &sorted[i..j];
        groups.push(DegenerateGroup {
            value: members.iter().sum::<f64>() / members.len() as f64,
            count: members.len(),
        });
        i = j;
    }
    groups
}

/// `(max − min) / max` over the `k` largest magnitudes.
pub fn magnitude_spread(values: &[f64], k: usize) -> Option<f64> {
    if k == 0 || values.len() < k {
        return None;
    }
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let (max, min) = (mags[0], mags[k - 1]);
    (max > 0.0).then(|| (max - min) / max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMatch {
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub matches: Vec<SpectrumMatch>,
    /// `None` when nothing matched.
    pub max_rel_deviation: Option<f64>,
    pub unmatched_numeric: Vec<f64>,
    pub unmatched_analytic: Vec<f64>,
}

/// Match analytic entries above the numeric set's floor against numeric
/// eigenvalues, largest first within each sign.
pub fn compare_spectra(numeric: &SupermodeSet, analytic: &AnalyticSpectrum) -> ComparisonReport {
    compare_values(
        numeric.eigenvalues(),
        &analytic.significant_values(numeric.truncation_floor()),
    )
}

pub fn compare_values(numeric: &[f64], analytic: &[f64]) -> ComparisonReport {
    let split = |v: &[f64]| {
        let mut pos: Vec<f64> = v.iter().copied().filter(|x| *x > 0.0).collect();
        let mut neg: Vec<f64> = v.iter().copied().filter(|x| *x < 0.0).collect();
        pos.sort_by(|a, b| b.total_cmp(a));
        neg.sort_by(f64::total_cmp);
        (pos, neg)
    };
    let (np, nn) = split(numeric);
    let (ap, an) = split(analytic);
    let mut report = ComparisonReport {
        matches: Vec::new(),
        max_rel_deviation: None,
        unmatched_numeric: numeric.iter().copied().filter(|x| *x == 0.0).collect(),
        unmatched_analytic: Vec::new(),
    };
    for (nums, anas) in [(np, ap), (nn, an)] {
        let paired = nums.len().min(anas.len());
        for (&n, &a) in nums.iter().zip(&anas) {
            report.matches.push(SpectrumMatch {
                analytic: a,
                numeric: n,
                rel_error: (n - a).abs() / a.abs(),
            });
        }
        report.unmatched_numeric.extend_from_slice(&nums[paired..]);
        report.unmatched_analytic.extend_from_slice(&anas[paired..]);
    }
    report.max_rel_deviation = report.matches.iter().map(|m| m.rel_error).reduce(f64::max);
    report
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::kernellab::{build_modulated, Harmonic, Provenance};
    use crate::numerics::make_uniform_axis;

    fn solve(spec: &ModulatedKernelSpec, n: usize) -> SupermodeSet {
        let axis = spec.default_axis(n).unwrap();
        solve_fredholm(&build_modulated(spec, &axis).unwrap()).unwrap()
    }

    fn fig1a(sigma: f64) -> ModulatedKernelSpec {
        ModulatedKernelSpec::symmetric(
            sigma,
            ModulatedKernelSpec::harmonic_ladder(&[0.0, 1.0, 1.0], 3.0 * PI * sigma),
            vec![Harmonic::new(1.0, 0.0)],
        )
        .unwrap()
    }

    fn fig1c(sigma: f64) -> ModulatedKernelSpec {
        ModulatedKernelSpec::symmetric(
            sigma,
            vec![Harmonic::new(1.0, 0.0)],
            ModulatedKernelSpec::harmonic_ladder(&[-2.0, 1.0, 1.0], 3.0 * PI * sigma),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_leading_eigenvalue() {
        let s = solve(&ModulatedKernelSpec::gaussian(0.5).unwrap(), 256);
        assert_eq!(s.len(), 1);
        let expected = (PI / 2.0).sqrt() / 0.5;
        assert!((s.eigenvalues()[0] - expected).abs() < 1e-9 * expected);
        assert!((s.eigenvalues()[0] - 2.50663).abs() < 1e-5);
    }

    #[test]
    fn rank_one_kernel() {
        let axis = make_uniform_axis(5.0, 101).unwrap();
        let f: Vec<f64> = axis.points().iter().map(|x| (1.0 + x) * (-x * x).exp()).collect();
        let norm2 = axis.inner(&f, &f);
        let k = KernelMatrix::from_parts(
            axis.clone(),
            SymMatrix::from_fn(101, |i, j| f[i] * f[j]),
            Provenance::Custom { description: "rank one".into() },
        )
        .unwrap();
        let s = solve_fredholm(&k).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.eigenvalues()[0] - norm2).abs() < 1e-12 * norm2);
        assert!((s.overlap(0, &f).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        let spec = ModulatedKernelSpec::new(
            1.0,
            0.5,
            vec![Harmonic::new(1.0, 0.0), Harmonic::new(0.5, 12.0)],
            vec![Harmonic::new(1.0, 0.0)],
        )
        .unwrap();
        let s = solve(&spec, 300);
        let axis = s.axis();
        for a in 0..s.len().min(12) {
            for b in 0..s.len().min(12) {
                let ip = axis.inner(s.eigenfunction(a).unwrap(), s.eigenfunction(b).unwrap());
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-8);
            }
        }
        assert!(s.eigenvalues().windows(2).all(|w| w[0].abs() >= w[1].abs()));
    }

    #[test]
    fn zero_kernel_flags_empty_set() {
        let axis = make_uniform_axis(1.0, 8).unwrap();
        let k = KernelMatrix::from_parts(axis, SymMatrix::zeros(8), Provenance::Custom { description: "0".into() })
            .unwrap();
        let s = solve_fredholm(&k).unwrap();
        assert!(s.is_empty());
        assert!(s.all_below_floor());
    }

    #[test]
    fn eigenvalues_only_matches_full_solve() {
        let spec = fig1c(0.01);
        let axis = spec.default_axis(400).unwrap();
        let k = build_modulated(&spec, &axis).unwrap();
        let full = solve_fredholm(&k).unwrap();
        let quick = solve_fredholm_with(&k, &SolveOptions::eigenvalues_only()).unwrap();
        assert!(!quick.has_eigenfunctions());
        assert_eq!(full.len(), quick.len());
        for (a, b) in full.eigenvalues().iter().zip(quick.eigenvalues()) {
            assert!((a - b).abs() < 1e-12 * full.eigenvalues()[0].abs());
        }
    }

    #[test]
    fn fig1a_spectrum() {
        let sigma = 0.005;
        let spec = fig1a(sigma);
        let predicted = predict_modulated_spectrum(&spec).unwrap();
        assert!(predicted.valid);
        assert_eq!(predicted.total_count(), 5);
        let scale = (PI / (8.0 * sigma * sigma)).sqrt();
        let sig = predicted.significant_values(1e-9);
        assert_eq!(sig, vec![scale, scale, -scale, -scale]);

        let s = solve(&spec, 512);
        let groups = group_degeneracies(&s, 0.02).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!((groups[0].count, groups[1].count), (2, 2));
        assert!(groups[0].value * groups[1].value < 0.0);
        let report = compare_spectra(&s, &predicted);
        assert_eq!(report.matches.len(), 4);
        assert!(report.unmatched_analytic.is_empty());
        assert!(report.max_rel_deviation.unwrap() < 0.02);
    }

    #[test]
    fn fig1c_spectrum() {
        let sigma = 0.005;
        let predicted = predict_modulated_spectrum(&fig1c(sigma)).unwrap();
        let unit = (PI / (8.0 * sigma * sigma)).sqrt();
        let sig: Vec<f64> = predicted.significant_values(1e-9).iter().map(|v| v / unit).collect();
        assert_eq!(sig.len(), 5);
        assert!((sig[0] + 4.0).abs() < 1e-12);
        assert!(sig[1..].iter().all(|v| (v - 1.0).abs() < 1e-12));

        let s = solve(&fig1c(sigma), 512);
        let report = compare_spectra(&s, &predicted);
        assert_eq!(report.matches.len(), 5);
        assert!(report.max_rel_deviation.unwrap() < 0.02);
    }

    #[test]
    fn colliding_ladders_are_flagged() {
        let ladder = ModulatedKernelSpec::harmonic_ladder(&[1.0, 1.0], 3.0 * PI * 0.05);
        let spec = ModulatedKernelSpec::symmetric(0.05, ladder.clone(), ladder).unwrap();
        let p = predict_modulated_spectrum(&spec).unwrap();
        assert!(p.valid && !p.resolved);
        assert!(predict_modulated_spectrum(&fig1a(0.05)).unwrap().resolved);
        assert!(predict_modulated_spectrum(&fig1c(0.05)).unwrap().resolved);
    }

    #[test]
    fn unmodulated_symmetric_ladder_collapses() {
        let sigma = 0.3;
        let p = predict_modulated_spectrum(&ModulatedKernelSpec::gaussian(sigma).unwrap()).unwrap();
        assert_eq!(p.entries.len(), 1);
        let lambda0 = (PI / (32.0 * sigma * sigma)).sqrt();
        assert!((p.entries[0].value - 4.0 * lambda0).abs() < 1e-14);
    }

    #[test]
    fn asymmetric_ladder_matches_numeric() {
        let spec = ModulatedKernelSpec::new(2.0, 1.0, vec![Harmonic::new(1.0, 0.0)], vec![Harmonic::new(1.0, 0.0)])
            .unwrap();
        let p = predict_modulated_spectrum(&spec).unwrap();
        let values = p.values();
        let s = solve(&spec, 400);
        for (m, (num, ana)) in s.eigenvalues().iter().zip(&values).take(6).enumerate() {
            assert!((num - ana).abs() < 1e-6 * values[0].abs(), "m={m}: {num} vs {ana}");
        }
        assert_eq!(values[1] < 0.0, true);
    }

    #[test]
    fn analytic_eigenfunction_values() {
        let spec = fig1a(0.005);
        let g = analytic_eigenfunction(&spec, ModeLabel::new(0, 0, 0, Trig::Cos, Trig::Cos), 30.0).unwrap();
        assert!((g - (-(0.005f64 * 30.0).powi(2)).exp()).abs() < 1e-15);
        let c = analytic_eigenfunction(&spec, ModeLabel::new(1, 0, 0, Trig::Cos, Trig::Cos), 0.0).unwrap();
        assert_eq!(c, 1.0);
        assert!(analytic_eigenfunction(&spec, ModeLabel::new(3, 0, 0, Trig::Cos, Trig::Cos), 0.0).is_err());
        assert!(analytic_eigenfunction(&spec, ModeLabel::new(1, 0, 0, Trig::Cos, Trig::Sin), 0.0).is_err());
    }

    #[test]
    fn analytic_mode_lies_in_numeric_subspace() {
        let spec = fig1a(0.005);
        let s = solve(&spec, 512);
        // the two positive modes are near-degenerate and may mix
        let positive: Vec<usize> = (0..s.len()).filter(|&i| s.eigenvalues()[i] > 0.0).take(2).collect();
        for n1 in [1, 2] {
            let f = sampled_analytic_mode(&spec, ModeLabel::new(n1, 0, 0, Trig::Cos, Trig::Cos), s.axis()).unwrap();
            assert!(s.subspace_overlap(&positive, &f).unwrap() >= 0.999);
        }
    }

    #[test]
    fn grid_refinement() {
        let spec = ModulatedKernelSpec::gaussian(0.7).unwrap();
        let a = solve(&spec, 128).eigenvalues()[0];
        let b = solve(&spec, 256).eigenvalues()[0];
        assert!((a - b).abs() <= 1e-6 * b.abs());
    }

    #[test]
    fn dilation_rescales_spectrum() {
        let c = 3.0;
        let spec = fig1c(0.2);
        let axis = spec.default_axis(300).unwrap();
        let base = solve_fredholm(&build_modulated(&spec, &axis).unwrap()).unwrap();
        let wide = ModulatedKernelSpec::symmetric(
            0.2 / c,
            spec.plus_terms.clone(),
            spec.minus_terms.iter().map(|t| Harmonic::new(t.b, t.beta / c)).collect(),
        )
        .unwrap();
        let dilated = solve_fredholm(&build_modulated(&wide, &axis.dilated(c).unwrap()).unwrap()).unwrap();
        assert_eq!(base.len(), dilated.len());
        for (a, b) in base.eigenvalues().iter().zip(dilated.eigenvalues()).take(5) {
            assert!((b / a - c).abs() < 1e-6 * c);
        }
    }

    #[test]
    fn grouping() {
        let g = group_values(&[1.0, 1.001, -1.0], 0.01).unwrap();
        assert_eq!(g.len(), 2);
        assert!((g[0].value - 1.0005).abs() < 1e-12 && g[0].count == 2);
        assert_eq!((g[1].value, g[1].count), (-1.0, 1));
        let m = group_magnitudes(&[1.0, -1.001, 0.5], 0.01).unwrap();
        assert_eq!(m[0].count, 2);
        assert!(group_values(&[1.0], 0.0).is_err());
        assert!(group_values(&[1.0], 0.2).is_err());
        assert_eq!(magnitude_spread(&[2.0, -1.0, 1.5], 2), Some(0.25));
        assert_eq!(magnitude_spread(&[2.0], 2), None);
    }

    #[test]
    fn comparison_edge_cases() {
        let r = compare_values(&[3.0, -1.0, 0.1], &[]);
        assert!(r.matches.is_empty());
        assert_eq!(r.unmatched_numeric.len(), 3);
        assert_eq!(r.max_rel_deviation, None);
        let r = compare_values(&[2.0], &[2.0, 1.0, -1.0]);
        assert_eq!(r.matches.len(), 1);
        assert_eq!(r.unmatched_analytic, vec![1.0, -1.0]);
    }

    #[test]
    fn csv_exports() {
        let s = solve(&ModulatedKernelSpec::gaussian(1.0).unwrap(), 21);
        let mut buf = Vec::new();
        s.write_eigenvalues_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("index,eigenvalue\n1,"));
        let mut buf = Vec::new();
        s.write_modes_csv(&mut buf, 3, 5).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("x,s1"));
        assert_eq!(text.lines().count(), 6);
    }

    fn arb_symmetric_spec() -> impl Strategy<Value = ModulatedKernelSpec> {
        (
            proptest::collection::vec(0.2f64..2.0, 1..4),
            proptest::collection::vec(0.2f64..2.0, 1..3),
        )
            .prop_map(|(plus, minus)| {
                let sigma = 0.05;
                let spacing = 3.0 * PI * sigma;
                // minus ladder on a coarser radix so that β⁺_i ± β⁻_j never collide
                let radix = (2 * plus.len() - 1) as f64;
                ModulatedKernelSpec::symmetric(
                    sigma,
                    ModulatedKernelSpec::harmonic_ladder(&plus, spacing),
                    ModulatedKernelSpec::harmonic_ladder(&minus, radix * spacing),
                )
                .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn numeric_agrees_with_analytic(spec in arb_symmetric_spec()) {
            let predicted = predict_modulated_spectrum(&spec).unwrap();
            let np = spec.plus_terms.len() - 1;
            let nm = spec.minus_terms.len() - 1;
            prop_assert_eq!(predicted.total_count(), (2 * np + 1) * (2 * nm + 1));
            prop_assert!(predicted.valid && predicted.resolved);
            let s = solve(&spec, 600);
            let report = compare_spectra(&s, &predicted);
            prop_assert!(report.unmatched_analytic.is_empty());
            prop_assert!(report.max_rel_deviation.unwrap() <= 0.02);
        }

        #[test]
        fn isolated_modes_have_definite_parity(
            sp in 0.3f64..1.0,
            sm in 0.3f64..1.0,
            b1 in 0.2f64..1.0,
        ) {
            let spec = ModulatedKernelSpec::new(
                sp,
                sm,
                vec![Harmonic::new(1.0, 0.0), Harmonic::new(b1, 10.0)],
                vec![Harmonic::new(1.0, 0.0)],
            )
            .unwrap();
            let s = solve(&spec, 301);
            let ev = s.eigenvalues();
            for k in 0..s.len().min(8) {
                let gap = (0..s.len())
                    .filter(|&j| j != k)
                    .map(|j| (ev[j] - ev[k]).abs())
                    .fold(f64::INFINITY, f64::min);
                if gap < 1e-6 * ev[0].abs() {
                    continue;
                }
                let f = s.eigenfunction(k).unwrap();
                let n = f.len();
                let even = (0..n).map(|i| (f[i] - f[n - 1 - i]).abs()).fold(0.0, f64::max);
                let odd = (0..n).map(|i| (f[i] + f[n - 1 - i]).abs()).fold(0.0, f64::max);
                prop_assert!(even.min(odd) < 1e-6, "mode {} even {} odd {}", k, even, odd);
            }
        }
    }
}
