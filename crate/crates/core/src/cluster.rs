//! Cluster and GHZ states built from independently squeezed supermodes.
//!
//! Covariance matrices use quadrature ordering `(X₁..Xₙ, P₁..Pₙ)` with
//! `X = B† + B`, `P = i(B† − B)`, so the vacuum is the identity.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernellab::ModulatedKernelSpec;
use crate::numerics::{determinant, symmetric_eig, symmetric_eigenvalues, EigenOrder, SymMatrix};
use crate::supermodes::predict_modulated_spectrum;
use crate::transverse::{hybrid_modes, Grid2d, LGFamily};

/// Real symmetric mode-coupling matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingMatrix {
    entries: SymMatrix,
}

impl CouplingMatrix {
    /// Rejects any asymmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(CouplingMatrix {
            entries: SymMatrix::from_rows(rows, 0.0)?,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.to_rows()
    }
}

/// Four-mode ring with couplings `1/√2` and one sign-flipped edge (1–4).
pub fn ring4_matrix() -> CouplingMatrix {
    let c = FRAC_1_SQRT_2;
    CouplingMatrix::from_rows(&[
        vec![0.0, c, 0.0, -c],
        vec![c, 0.0, c, 0.0],
        vec![0.0, c, 0.0, c],
        vec![-c, 0.0, c, 0.0],
    ])
    .expect("ring matrix is symmetric")
}

/// Complete graph on `n` modes, every edge `weight`, zero diagonal.
pub fn complete_matrix(n: usize, weight: f64) -> Result<CouplingMatrix> {
    if n < 2 {
        return Err(Error::invalid("a complete graph needs at least two modes"));
    }
    if !weight.is_finite() {
        return Err(Error::invalid("edge weight must be finite"));
    }
    Ok(CouplingMatrix {
        entries: SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { weight }),
    })
}

/// `K = U diag(L) Uᵀ` with `L` sorted by `|L|` descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingDecomposition {
    pub spectrum: Vec<f64>,
    /// Row-major `U`; column `k` is the mode belonging to `spectrum[k]`.
    pub basis: Vec<Vec<f64>>,
}

impl CouplingDecomposition {
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let n = self.spectrum.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.basis[i][k] * self.spectrum[k] * self.basis[j][k]).sum())
                    .collect()
            })
            .collect()
    }

    /// Reorder modes: new mode `k` is old mode `perm[k]`. The assignment of
    /// supermodes to graph vertices is a free choice.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.spectrum.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid(format!("not a permutation of 0..{n}: {perm:?}")));
        }
        Ok(CouplingDecomposition {
            spectrum: perm.iter().map(|&p| self.spectrum[p]).collect(),
            basis: self
                .basis
                .iter()
                .map(|row| perm.iter().map(|&p| row[p]).collect())
                .collect(),
        })
    }
}

pub fn decompose_coupling(k: &CouplingMatrix) -> Result<CouplingDecomposition> {
    let eig = symmetric_eig(k.as_sym(), EigenOrder::AbsDescending)?;
    let n = k.n();
    let basis = (0..n).map(|i| (0..n).map(|c| eig.vector(c)[i]).collect()).collect();
    Ok(CouplingDecomposition {
        spectrum: eig.eigenvalues,
        basis,
    })
}

/// A modulated-kernel spec whose analytic spectrum is `scale · target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatch {
    pub spec: ModulatedKernelSpec,
    pub scale: f64,
}

/// No exact realization; `closest` is the nearest spectrum found, in the
/// target's units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Infeasible {
    pub closest: Vec<f64>,
    pub closest_spec: Option<KernelMatch>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum MatchOutcome {
    Exact(KernelMatch),
    Infeasible(Infeasible),
}

/// Target size above which the exhaustive search is skipped.
pub const MAX_EXACT_TARGET: usize = 12;
const MATCH_TOL: f64 = 1e-12;
const MAX_PARTITIONS: usize = 200_000;

#[derive(Debug, Clone, Default)]
struct Partition {
    single: Option<f64>,
    /// same-sign pairs `{v, v}`
    same: Vec<f64>,
    /// `{v, −v}`, stored as `|v|`
    opposite: Vec<f64>,
    /// `{v, v, −v, −v}`, stored as `|v|`
    quad: Vec<f64>,
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * scale
}

fn take(rest: &mut Vec<f64>, v: f64, scale: f64) -> bool {
    match rest.iter().position(|&x| close(x, v, scale)) {
        Some(i) => {
            rest.remove(i);
            true
        }
        None => false,
    }
}

fn partitions(rest: Vec<f64>, acc: Partition, scale: f64, out: &mut Vec<Partition>) {
    if out.len() >= MAX_PARTITIONS {
        return;
    }
    let Some((&v, tail)) = rest.split_first() else {
        out.push(acc);
        return;
    };
    let tail = tail.to_vec();
    if acc.single.is_none() {
        let mut next = acc.clone();
        next.single = Some(v);
        partitions(tail.clone(), next, scale, out);
    }
    let mut r = tail.clone();
    if take(&mut r, v, scale) {
        let mut next = acc.clone();
        next.same.push(v);
        partitions(r.clone(), next, scale, out);
        if take(&mut r, -v, scale) && take(&mut r, -v, scale) {
            let mut next = acc.clone();
            next.quad.push(v.abs());
            partitions(r, next, scale, out);
        }
    }
    let mut r = tail;
    if take(&mut r, -v, scale) {
        let mut next = acc;
        next.opposite.push(v.abs());
        partitions(r, next, scale, out);
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Candidate harmonic amplitudes `(b⁺, b⁻)` (index 0 = unmodulated term) and
/// the scale in units of `u = √(π/32σ²)`.
fn candidates(p: &Partition) -> Vec<(Vec<f64>, Vec<f64>, f64)> {
    let a = p.single.unwrap_or(0.0);
    let mut out = Vec::new();
    if p.quad.is_empty() {
        // A = 4u b₀⁺b₀⁻, C_i = ±2u b_i⁺ b₀⁻, B_j = 2u b₀⁺ b_j⁻; scale 2u
        if p.same.is_empty() {
            let mut plus = vec![0.5 * a];
            plus.extend(&p.opposite);
            out.push((plus, vec![1.0], 2.0));
        }
        if p.opposite.is_empty() {
            let mut minus = vec![0.5 * a];
            minus.extend(&p.same);
            out.push((vec![1.0], minus, 2.0));
        }
        return out;
    }
    // D_ij = ±u b_i⁺ b_j⁻; one side carries a single harmonic so any set of
    // quadruples is realizable. Scale u.
    let nd = p.quad.len();
    for (pair_side, paired) in [(&p.same, true), (&p.opposite, false)] {
        // `paired`: plus side has one harmonic, so B pairs sit on the minus
        // side next to the quadruples; otherwise mirror.
        let (along, across) = if paired { (pair_side, &p.opposite) } else { (pair_side, &p.same) };
        if !(along.is_empty() || along.len() == nd) || across.len() > 1 {
            continue;
        }
        for perm in permutations(if along.is_empty() { 0 } else { nd }) {
            let zero = if along.is_empty() {
                0.0
            } else {
                along[perm[0]] / (2.0 * p.quad[0])
            };
            let lone = across.first().map_or(0.0, |c| 0.5 * c);
            let mut long = vec![zero];
            long.extend(&p.quad);
            let short = vec![lone, 1.0];
            if paired {
                out.push((short, long, 1.0));
            } else {
                out.push((long, short, 1.0));
            }
        }
    }
    out
}

fn build_spec(plus: &[f64], minus: &[f64], sigma: f64) -> Result<ModulatedKernelSpec> {
    let spacing = 3.0 * PI * sigma;
    let radix = (2 * (plus.len() - 1) + 1) as f64;
    ModulatedKernelSpec::symmetric(
        sigma,
        ModulatedKernelSpec::harmonic_ladder(plus, spacing),
        ModulatedKernelSpec::harmonic_ladder(minus, radix * spacing),
    )
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Analytic nonzero spectrum of `spec` divided by `scale`, sorted.
fn realized(spec: &ModulatedKernelSpec, scale: f64) -> Result<Vec<f64>> {
    let pred = predict_modulated_spectrum(spec)?;
    Ok(sorted(pred.significant_values(MATCH_TOL).into_iter().map(|v| v / scale).collect()))
}

fn nonzero_terms(spec: &ModulatedKernelSpec) -> usize {
    spec.plus_terms.iter().chain(&spec.minus_terms).filter(|t| t.b != 0.0).count()
}

/// Find a modulated-Gaussian kernel whose analytic spectrum equals `target`
/// up to a positive scale.
///
/// Targets are split into the four closed-form families (lone Gaussian
/// value, same-sign pairs, `±` pairs, `±` quadruples); each split is turned
/// into a candidate spec and accepted only if its predicted spectrum matches.
/// Among exact matches the one without quadruples, then with fewest nonzero
/// terms, then with fewest minus-side harmonics wins.
pub fn match_spectrum_to_kernel(target: &[f64], sigma: f64) -> Result<MatchOutcome> {
    if target.is_empty() {
        return Err(Error::invalid("target spectrum is empty"));
    }
    if target.iter().any(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::invalid("target entries must be finite and nonzero"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let u = (PI / (32.0 * sigma * sigma)).sqrt();
    let mag = target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let want = sorted(target.to_vec());

    if target.len() <= MAX_EXACT_TARGET {
        let mut ordered = target.to_vec();
        ordered.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
        let mut parts = Vec::new();
        partitions(ordered, Partition::default(), mag, &mut parts);
        let mut best: Option<((bool, usize, usize), KernelMatch)> = None;
        for p in &parts {
            for (plus, minus, units) in candidates(p) {
                let spec = build_spec(&plus, &minus, sigma)?;
                let scale = units * u;
                let got = realized(&spec, scale)?;
                let exact = got.len() == want.len()
                    && got.iter().zip(&want).all(|(g, w)| close(*g, *w, mag));
                if !exact {
                    continue;
                }
                let key = (!p.quad.is_empty(), nonzero_terms(&spec), spec.minus_terms.len());
                if best.as_ref().map_or(true, |(k, _)| key < *k) {
                    best = Some((key, KernelMatch { spec, scale }));
                }
            }
        }
        if let Some((_, m)) = best {
            return Ok(MatchOutcome::Exact(m));
        }
    }
    closest_match(&want, sigma, u).map(MatchOutcome::Infeasible)
}

/// Heuristic nearest spectrum: pair values either as `±` pairs or as
/// same-sign neighbours, averaging each pair, and keep the better fit.
fn closest_match(want: &[f64], sigma: f64, u: f64) -> Result<Infeasible> {
    let mut options: Vec<Partition> = Vec::new();

    let mut pos: Vec<f64> = want.iter().copied().filter(|v| *v > 0.0).collect();
    let mut neg: Vec<f64> = want.iter().map(|v| -v).filter(|v| *v > 0.0).collect();
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| b.total_cmp(a));
    let k = pos.len().min(neg.len());
    let mut opp = Partition {
        opposite: (0..k).map(|i| 0.5 * (pos[i] + neg[i])).collect(),
        ..Partition::default()
    };
    let leftovers: Vec<f64> = pos[k..].iter().copied().chain(neg[k..].iter().map(|v| -v)).collect();
    if let Some((&first, rest)) = leftovers.split_first() {
        opp.single = Some(first);
        opp.opposite.extend(rest.iter().map(|v| v.abs()));
    }
    options.push(opp);

    let mut desc = want.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    let mut same = Partition::default();
    let mut i = 0;
    while i < desc.len() {
        if i + 1 < desc.len() && desc[i].signum() == desc[i + 1].signum() {
            same.same.push(0.5 * (desc[i] + desc[i + 1]));
            i += 2;
        } else if same.single.is_none() {
            same.single = Some(desc[i]);
            i += 1;
        } else {
            same.same.push(desc[i]);
            i += 1;
        }
    }
    options.push(same);

    let mut best: Option<Infeasible> = None;
    for p in &options {
        for (plus, minus, units) in candidates(p) {
            let spec = build_spec(&plus, &minus, sigma)?;
            let scale = units * u;
            let got = realized(&spec, scale)?;
            let n = got.len().max(want.len());
            let pad = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
            let residual = (0..n).map(|i| (pad(&got, i) - pad(want, i)).powi(2)).sum::<f64>().sqrt();
            if best.as_ref().map_or(true, |b| residual < b.residual) {
                best = Some(Infeasible {
                    closest: got,
                    closest_spec: Some(KernelMatch { spec, scale }),
                    residual,
                });
            }
        }
    }
    Ok(best.unwrap_or(Infeasible {
        closest: Vec::new(),
        closest_spec: None,
        residual: f64::INFINITY,
    }))
}

/// Orthogonal `n × n` matrix with uniform first row `1/√n`; the remaining
/// rows are Gram–Schmidt on `e_k − e_{k+1}`.
pub fn braunstein_rotation(n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(Error::invalid("the rotation needs at least two modes"));
    }
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for k in 0..n - 1 {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        v[k + 1] = -1.0;
        for r in &rows {
            let d: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(r).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        rows.push(v.into_iter().map(|x| x / norm).collect());
    }
    Ok(rows)
}

/// Symplectic form for `(X₁..Xₙ, P₁..Pₙ)` ordering: `[[0, I], [−I, 0]]`.
fn omega(n: usize, i: usize, j: usize) -> f64 {
    if j == i + n {
        1.0
    } else if i == j + n {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceMatrix {
    v: SymMatrix,
}

impl CovarianceMatrix {
    pub fn vacuum(modes: usize) -> Self {
        CovarianceMatrix {
            v: SymMatrix::identity(2 * modes),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let v = SymMatrix::from_rows(rows, 1e-12)?;
        if v.dim() % 2 != 0 || v.dim() == 0 {
            return Err(Error::invalid("covariance dimension must be even and positive"));
        }
        Ok(CovarianceMatrix { v })
    }

    pub fn modes(&self) -> usize {
        self.v.dim() / 2
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.v
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.v.to_rows()
    }

    /// `uᵀ V u`.
    pub fn variance(&self, u: &[f64]) -> f64 {
        self.v.quadratic_form(u)
    }

    /// Smallest eigenvalue of the Hermitian `V + iΩ`, via its real
    /// representation `[[V, −Ω], [Ω, V]]`.
    pub fn uncertainty_margin(&self) -> Result<f64> {
        let d = self.v.dim();
        let n = d / 2;
        let big = SymMatrix::from_fn(2 * d, |i, j| match (i < d, j < d) {
            (true, true) => self.v.get(i, j),
            (false, false) => self.v.get(i - d, j - d),
            (true, false) => -omega(n, i, j - d),
            (false, true) => omega(n, i - d, j),
        });
        let ev = symmetric_eigenvalues(&big, EigenOrder::ValueDescending)?;
        Ok(ev[ev.len() - 1])
    }

    pub fn satisfies_uncertainty(&self, tol: f64) -> Result<bool> {
        Ok(self.uncertainty_margin()? >= -tol)
    }

    pub fn is_positive_definite(&self) -> Result<bool> {
        let ev = symmetric_eigenvalues(&self.v, EigenOrder::ValueDescending)?;
        Ok(ev[ev.len() - 1] > 0.0)
    }

    pub fn det(&self) -> Result<f64> {
        determinant(&self.v.to_rows())
    }

    /// Symplectic eigenvalues `ν_k ≥ 0`, ascending, from the spectrum of
    /// `(V^{1/2} Ω V^{1/2})ᵀ (V^{1/2} Ω V^{1/2})`, which holds each `ν²` twice.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let d = self.v.dim();
        let n = d / 2;
        let eig = symmetric_eig(&self.v, EigenOrder::ValueDescending)?;
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::invalid("covariance is not positive definite"));
        }
        let root = SymMatrix::from_fn(d, |i, j| {
            eig.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, l)| l.sqrt() * eig.vector(k)[i] * eig.vector(k)[j])
                .sum()
        });
        // M = R Ω R (antisymmetric); MᵀM = −M²
        let omega_r: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| omega(n, i, k) * root.get(k, j)).sum()).collect())
            .collect();
        let m: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| root.get(i, k) * omega_r[k][j]).sum()).collect())
            .collect();
        let mtm = SymMatrix::from_fn(d, |i, j| (0..d).map(|k| m[k][i] * m[k][j]).sum());
        let mut nu2 = symmetric_eigenvalues(&mtm, EigenOrder::ValueDescending)?;
        nu2.reverse();
        Ok(nu2.iter().step_by(2).take(n).map(|x| x.max(0.0).sqrt()).collect())
    }

    /// Covariance of the listed modes after tracing out the rest.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        let n = self.modes();
        if modes.is_empty() || modes.iter().any(|&m| m >= n) {
            return Err(Error::invalid(format!("mode indices must lie in 0..{n}")));
        }
        let idx: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|m| m + n)).collect();
        Ok(CovarianceMatrix {
            v: SymMatrix::from_fn(idx.len(), |i, j| self.v.get(idx[i], idx[j])),
        })
    }

    /// Transposition on `mode`: `P_mode → −P_mode`.
    pub fn partial_transpose(&self, mode: usize) -> Self {
        let n = self.modes();
        let flip = |i: usize| if i == mode + n { -1.0 } else { 1.0 };
        CovarianceMatrix {
            v: self.v.map(|i, j, x| flip(i) * flip(j) * x),
        }
    }

    /// Output covariance after `X → Rᵀ X`, `P → Rᵀ P`.
    pub fn rotated(&self, rotation: &[Vec<f64>]) -> Result<Self> {
        let n = self.modes();
        if rotation.len() != n || rotation.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("rotation must be {n}x{n}")));
        }
        // S = Rᵀ ⊕ Rᵀ; V' = S V Sᵀ
        let s = |i: usize, k: usize| -> f64 {
            match (i < n, k < n) {
                (true, true) => rotation[k][i],
                (false, false) => rotation[k - n][i - n],
                _ => 0.0,
            }
        };
        let d = 2 * n;
        let sv: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| s(i, k) * self.v.get(k, j)).sum()).collect())
            .collect();
        Ok(CovarianceMatrix {
            v: SymMatrix::from_fn(d, |i, j| (0..d).map(|k| sv[i][k] * s(j, k)).sum()),
        })
    }
}

/// Squeezed inputs (mode 1 in X, the rest in P) through `rotation`.
pub fn ghz_covariance_with_rotation(rotation: &[Vec<f64>], r_squeeze: f64) -> Result<CovarianceMatrix> {
    if !(r_squeeze >= 0.0 && r_squeeze.is_finite()) {
        return Err(Error::invalid(format!("squeezing parameter must be >= 0, got {r_squeeze}")));
    }
    let n = rotation.len();
    let (lo, hi) = ((-2.0 * r_squeeze).exp(), (2.0 * r_squeeze).exp());
    let diag: Vec<f64> = (0..2 * n)
        .map(|i| match (i < n, i % n == 0) {
            (true, true) | (false, false) => lo,
            _ => hi,
        })
        .collect();
    CovarianceMatrix {
        v: SymMatrix::from_diagonal(&diag),
    }
    .rotated(rotation)
}

pub fn ghz_covariance(n: usize, r_squeeze: f64) -> Result<CovarianceMatrix> {
    ghz_covariance_with_rotation(&braunstein_rotation(n)?, r_squeeze)
}

/// Squeezing parameter `r` with `e^{−2r} = v` for a squeezed-quadrature noise `v`.
pub fn squeeze_parameter_from_noise(v: f64) -> Result<f64> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::invalid(format!("noise level must lie in (0, 1], got {v}")));
    }
    Ok(-0.5 * v.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointVariances {
    pub var_sum_x: f64,
    pub max_var_p_diff: f64,
    /// `Var(P_j − P_{j+1 mod n})` for each `j`.
    pub p_diffs: Vec<f64>,
}

pub fn joint_variances(v: &CovarianceMatrix) -> JointVariances {
    let n = v.modes();
    let mut u = vec![0.0; 2 * n];
    u[..n].iter_mut().for_each(|x| *x = 1.0);
    let var_sum_x = v.variance(&u);
    let p_diffs: Vec<f64> = (0..n)
        .map(|j| {
            let mut u = vec![0.0; 2 * n];
            u[n + j] += 1.0;
            u[n + (j + 1) % n] -= 1.0;
            v.variance(&u)
        })
        .collect();
    JointVariances {
        var_sum_x,
        max_var_p_diff: p_diffs.iter().copied().fold(f64::MIN, f64::max),
        p_diffs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    /// Smallest symplectic eigenvalue of the partially transposed pair.
    pub min_symplectic_eigenvalue: f64,
    pub separable: bool,
}

/// PPT test on the two-mode reduced state of modes `a` and `b`; for two
/// modes it decides separability.
pub fn ppt_pair(v: &CovarianceMatrix, a: usize, b: usize) -> Result<PptReport> {
    if a == b {
        return Err(Error::invalid("PPT test needs two distinct modes"));
    }
    let pair = v.reduced(&[a, b])?.partial_transpose(1);
    let nu = pair.symplectic_eigenvalues()?;
    let min = nu.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PptReport {
        min_symplectic_eigenvalue: min,
        separable: min >= 1.0 - 1e-9,
    })
}

/// Intensity maps of `rotation` applied to the ordered hybrid modes of `fam`
/// (`C_{l₀}` entering with a `π/2` phase). Output `j` is
/// `Σ_k R_kj φ_k`; each map integrates to 1 on `grid`.
pub fn entangled_mode_profiles(fam: &LGFamily, rotation: &[Vec<f64>], grid: &Grid2d) -> Result<Vec<Vec<f64>>> {
    let modes = hybrid_modes(fam, grid)?;
    let n = modes.len();
    if rotation.len() != n || rotation.iter().any(|r| r.len() != n) {
        return Err(Error::invalid(format!(
            "family f = {} has {n} hybrid modes; rotation must be {n}x{n}",
            fam.f
        )));
    }
    (0..n)
        .map(|j| {
            let field: Vec<f64> = (0..grid.len())
                .map(|p| {
                    let im = rotation[0][j] * modes[0].2[p];
                    let re: f64 = (1..n).map(|k| rotation[k][j] * modes[k].2[p]).sum();
                    re * re + im * im
                })
                .collect();
            let power = grid.weight() * field.iter().sum::<f64>();
            if power == 0.0 {
                return Err(Error::Numerical("entangled mode vanishes on the grid".into()));
            }
            Ok(field.into_iter().map(|x| x / power).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::kernellab::Harmonic;

    fn sorted_close(a: &[f64], b: &[f64], tol: f64) -> bool {
        let (a, b) = (sorted(a.to_vec()), sorted(b.to_vec()));
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn example_matrices() {
        let ring = ring4_matrix();
        assert_eq!(ring.get(0, 1), FRAC_1_SQRT_2);
        assert_eq!(ring.get(0, 3), -FRAC_1_SQRT_2);
        let d = decompose_coupling(&ring).unwrap();
        assert!(sorted_close(&d.spectrum, &[-1.0, -1.0, 1.0, 1.0], 1e-14));
        let k5 = decompose_coupling(&complete_matrix(5, -0.25).unwrap()).unwrap();
        assert!((k5.spectrum[0] + 1.0).abs() < 1e-14);
        assert!(k5.spectrum[1..].iter().all(|v| (v - 0.25).abs() < 1e-14));
        let k2 = decompose_coupling(&complete_matrix(2, 0.3).unwrap()).unwrap();
        assert!(sorted_close(&k2.spectrum, &[-0.3, 0.3], 1e-15));
        assert!(complete_matrix(1, 1.0).is_err());
        assert!(CouplingMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0 + 1e-15, 0.0]]).is_err());
    }

    #[test]
    fn diagonal_coupling_basis_is_a_permutation() {
        let d = decompose_coupling(&CouplingMatrix::from_rows(&[
            vec![0.5, 0.0, 0.0],
            vec![0.0, -2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap())
        .unwrap();
        assert_eq!(d.spectrum, vec![-2.0, 1.0, 0.5]);
        for row in &d.basis {
            assert_eq!(row.iter().filter(|x| x.abs() == 1.0).count(), 1);
        }
        let p = d.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.spectrum, vec![0.5, -2.0, 1.0]);
        assert!(d.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn ring_matches_fig1a_type_kernel() {
        let sigma = 0.005;
        let spectrum = decompose_coupling(&ring4_matrix()).unwrap().spectrum;
        let MatchOutcome::Exact(m) = match_spectrum_to_kernel(&spectrum, sigma).unwrap() else {
            panic!("ring spectrum should be realizable");
        };
        // two plus-side harmonics, Gaussian minus side, no lone Gaussian mode
        assert_eq!(m.spec.plus_terms.len(), 3);
        assert_eq!(m.spec.plus_terms[0].b, 0.0);
        assert_eq!(m.spec.minus_terms, vec![Harmonic::new(1.0, 0.0)]);
        assert!((m.scale - (PI / (8.0 * sigma * sigma)).sqrt()).abs() < 1e-12 * m.scale);
        let back = realized(&m.spec, m.scale).unwrap();
        assert!(sorted_close(&back, &spectrum, 1e-12));
    }

    #[test]
    fn complete_graph_matches_fig1c_type_kernel() {
        let sigma = 0.005;
        let spectrum = decompose_coupling(&complete_matrix(5, -0.25).unwrap()).unwrap().spectrum;
        let MatchOutcome::Exact(m) = match_spectrum_to_kernel(&spectrum, sigma).unwrap() else {
            panic!("complete-graph spectrum should be realizable");
        };
        assert_eq!(m.spec.plus_terms, vec![Harmonic::new(1.0, 0.0)]);
        let minus: Vec<f64> = m.spec.minus_terms.iter().map(|t| t.b).collect();
        // {−4, 1, 1, 1, 1} · ¼ in the b₀⁻ = −2 b₁⁻ = −2 b₂⁻ pattern
        assert_eq!(minus.len(), 3);
        assert!((minus[0] / minus[1] + 2.0).abs() < 1e-12 && (minus[1] - minus[2]).abs() < 1e-12);
        let back = realized(&m.spec, m.scale).unwrap();
        assert!(sorted_close(&back, &spectrum, 1e-12));
    }

    #[test]
    fn single_value_is_a_plain_gaussian() {
        let MatchOutcome::Exact(m) = match_spectrum_to_kernel(&[1.0], 0.1).unwrap() else {
            panic!()
        };
        assert_eq!(m.spec.plus_terms.len(), 1);
        assert_eq!(m.spec.minus_terms.len(), 1);
        assert!(sorted_close(&realized(&m.spec, m.scale).unwrap(), &[1.0], 1e-12));
    }

    #[test]
    fn quadruples_and_infeasible_targets() {
        // {2, 2, −2, −2, 1, 1, −1, −1} needs product modes or two ± pairs
        let t = [2.0, 2.0, -2.0, -2.0, 3.0, 3.0];
        match match_spectrum_to_kernel(&t, 0.01).unwrap() {
            MatchOutcome::Exact(m) => assert!(sorted_close(&realized(&m.spec, m.scale).unwrap(), &t, 1e-11)),
            other => panic!("{other:?}"),
        }
        // two distinct lone values cannot both be the Gaussian mode
        let t = [3.0, 1.0];
        let MatchOutcome::Infeasible(inf) = match_spectrum_to_kernel(&t, 0.01).unwrap() else {
            panic!("expected infeasible");
        };
        assert!(inf.residual.is_finite() && inf.residual > 0.0);
        assert!(inf.closest_spec.is_some());
        assert!(match_spectrum_to_kernel(&[], 0.01).is_err());
        assert!(match_spectrum_to_kernel(&[0.0], 0.01).is_err());
    }

    #[test]
    fn rotation_properties() {
        let r2 = braunstein_rotation(2).unwrap();
        assert!((r2[1][0] - FRAC_1_SQRT_2).abs() < 1e-15 && (r2[1][1] + FRAC_1_SQRT_2).abs() < 1e-15);
        for n in [2, 3, 5, 17, 64] {
            let r = braunstein_rotation(n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let d: f64 = (0..n).map(|k| r[i][k] * r[j][k]).sum();
                    assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
            assert!((r[0].iter().sum::<f64>() - (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    /// Independent propagation: output quadrature `j` is `Σ_k R_kj in_k`,
    /// so `Var(u·out) = Σ_k (Σ_j R_kj u_j)² Var(in_k)`.
    fn oracle_variance(rot: &[Vec<f64>], r: f64, ux: &[f64], up: &[f64]) -> f64 {
        let n = rot.len();
        (0..n)
            .map(|k| {
                let cx: f64 = (0..n).map(|j| rot[k][j] * ux[j]).sum();
                let cp: f64 = (0..n).map(|j| rot[k][j] * up[j]).sum();
                let (vx, vp) = if k == 0 { ((-2.0 * r).exp(), (2.0 * r).exp()) } else { ((2.0 * r).exp(), (-2.0 * r).exp()) };
                cx * cx * vx + cp * cp * vp
            })
            .sum()
    }

    #[test]
    fn ghz_joint_variances() {
        for n in [3, 4, 5] {
            for r in [0.0, 1.0, 2.0] {
                let rot = braunstein_rotation(n).unwrap();
                let v = ghz_covariance(n, r).unwrap();
                let jv = joint_variances(&v);
                let e = (-2.0 * r).exp();
                assert!((jv.var_sum_x - n as f64 * e).abs() < 1e-9);
                let ones = vec![1.0; n];
                assert!((oracle_variance(&rot, r, &ones, &vec![0.0; n]) - jv.var_sum_x).abs() < 1e-9);
                for j in 0..n {
                    let mut up = vec![0.0; n];
                    up[j] = 1.0;
                    up[(j + 1) % n] = -1.0;
                    assert!((jv.p_diffs[j] - 2.0 * e).abs() < 1e-9);
                    assert!((oracle_variance(&rot, r, &vec![0.0; n], &up) - jv.p_diffs[j]).abs() < 1e-9);
                }
                assert!(v.satisfies_uncertainty(1e-9).unwrap());
                assert!((v.det().unwrap() - 1.0).abs() < 1e-9);
            }
        }
        let vac = joint_variances(&ghz_covariance(5, 0.0).unwrap());
        assert!((vac.var_sum_x - 5.0).abs() < 1e-12 && (vac.max_var_p_diff - 2.0).abs() < 1e-12);
        let vac = ghz_covariance(3, 0.0).unwrap().to_rows();
        let id = CovarianceMatrix::vacuum(3).to_rows();
        assert!(vac.iter().flatten().zip(id.iter().flatten()).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn ten_db_ghz() {
        let r = squeeze_parameter_from_noise(0.1).unwrap();
        let jv = joint_variances(&ghz_covariance(4, r).unwrap());
        assert!(jv.var_sum_x <= 0.1 * 4.0 + 1e-12);
        assert!(jv.max_var_p_diff <= 0.1 * 2.0 + 1e-12);
        let mut last = f64::INFINITY;
        for i in 0..10 {
            let jv = joint_variances(&ghz_covariance(4, 0.2 * i as f64).unwrap());
            assert!(jv.var_sum_x < last);
            last = jv.var_sum_x;
        }
    }

    #[test]
    fn completion_choice_does_not_matter() {
        // Gram–Schmidt on e_2..e_n instead of adjacent differences
        let n = 5;
        let mut rows = vec![vec![1.0 / (n as f64).sqrt(); n]];
        for k in 1..n {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            for r in &rows {
                let d: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= d * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
        let a = joint_variances(&ghz_covariance(n, 1.3).unwrap());
        let b = joint_variances(&ghz_covariance_with_rotation(&rows, 1.3).unwrap());
        assert!((a.var_sum_x - b.var_sum_x).abs() < 1e-10);
        for (x, y) in a.p_diffs.iter().zip(&b.p_diffs) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn symplectic_spectrum_of_thermal_and_squeezed_states() {
        let thermal = CovarianceMatrix::from_rows(&[
            vec![3.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.5, 0.0, 0.0],
            vec![0.0, 0.0, 3.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.5],
        ])
        .unwrap();
        let nu = thermal.symplectic_eigenvalues().unwrap();
        assert!((nu[0] - 1.5).abs() < 1e-12 && (nu[1] - 3.0).abs() < 1e-12);
        let nu = ghz_covariance(4, 1.7).unwrap().symplectic_eigenvalues().unwrap();
        assert!(nu.iter().all(|x| (x - 1.0).abs() < 1e-9));
        let bad = CovarianceMatrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!(!bad.satisfies_uncertainty(1e-9).unwrap());
    }

    #[test]
    fn ghz_pairs_stay_entangled() {
        // Cross-check against the two-mode invariant formula
        // 2ν̃² = Δ̃ − √(Δ̃² − 4 det V), Δ̃ = det A + det B − 2 det C.
        let (n, r) = (5usize, 2.0f64);
        let v = ghz_covariance(n, r).unwrap();
        for (a, b) in [(0, 1), (0, 4), (2, 3)] {
            let rep = ppt_pair(&v, a, b).unwrap();
            let pair = v.reduced(&[a, b]).unwrap();
            let m = pair.to_rows();
            // blocks in (X_a, P_a), (X_b, P_b) ordering
            let va = [[m[0][0], m[0][2]], [m[2][0], m[2][2]]];
            let vb = [[m[1][1], m[1][3]], [m[3][1], m[3][3]]];
            let c = [[m[0][1], m[0][3]], [m[2][1], m[2][3]]];
            let d = |x: [[f64; 2]; 2]| x[0][0] * x[1][1] - x[0][1] * x[1][0];
            let tilde = d(va) + d(vb) - 2.0 * d(c);
            let det = pair.det().unwrap();
            let nu = ((tilde - (tilde * tilde - 4.0 * det).sqrt()) / 2.0).sqrt();
            assert!((rep.min_symplectic_eigenvalue - nu).abs() < 1e-8);
            assert!(!rep.separable, "pair ({a},{b}) {}", rep.min_symplectic_eigenvalue);
        }
        // r = 0: vacuum pairs are separable
        assert!(ppt_pair(&ghz_covariance(5, 0.0).unwrap(), 0, 1).unwrap().separable);
    }

    #[test]
    fn entangled_profiles() {
        let grid = Grid2d::symmetric(4.5, 61).unwrap();
        let fam = LGFamily::new(2);
        let id: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let plain = entangled_mode_profiles(&fam, &id, &grid).unwrap();
        let hybrids = hybrid_modes(&fam, &grid).unwrap();
        for (map, (_, _, h)) in plain.iter().zip(&hybrids) {
            assert!(map.iter().zip(h).all(|(a, b)| (a - b * b).abs() < 1e-12));
        }

        let maps = entangled_mode_profiles(&fam, &braunstein_rotation(3).unwrap(), &grid).unwrap();
        for a in 0..3 {
            for b in a + 1..3 {
                let dist = grid.inner(
                    &maps[a].iter().zip(&maps[b]).map(|(x, y)| x - y).collect::<Vec<_>>(),
                    &maps[a].iter().zip(&maps[b]).map(|(x, y)| x - y).collect::<Vec<_>>(),
                );
                assert!(dist.sqrt() > 0.1, "maps {a},{b}: {}", dist.sqrt());
            }
        }
        let f1 = entangled_mode_profiles(&LGFamily::new(1), &braunstein_rotation(2).unwrap(), &grid).unwrap();
        for m in &f1 {
            assert!((grid.weight() * m.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
        assert!(entangled_mode_profiles(&fam, &braunstein_rotation(2).unwrap(), &grid).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn decomposition_round_trip(n in 1usize..=32, seed in proptest::collection::vec(-1.0f64..1.0, 32 * 32)) {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| seed[i.min(j) * 32 + i.max(j)]).collect())
                .collect();
            let d = decompose_coupling(&CouplingMatrix::from_rows(&rows).unwrap()).unwrap();
            let back = d.reconstruct();
            let err: f64 = rows.iter().flatten().zip(back.iter().flatten()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err < 1e-10);
            prop_assert!(d.spectrum.windows(2).all(|w| w[0].abs() >= w[1].abs()));
        }

        #[test]
        fn rotations_preserve_purity(n in 2usize..7, r in 0.0f64..2.0, angles in proptest::collection::vec(0.0f64..6.3, 6)) {
            // random orthogonal matrix from Givens rotations
            let mut rot: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            for (k, a) in angles.iter().enumerate() {
                let (p, q) = (k % n, (k + 1) % n);
                let (c, s) = (a.cos(), a.sin());
                for row in rot.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
            let v = ghz_covariance_with_rotation(&rot, r).unwrap();
            prop_assert!((v.det().unwrap() - 1.0).abs() < 1e-9);
            prop_assert!(v.satisfies_uncertainty(1e-9).unwrap());
        }
    }
}
