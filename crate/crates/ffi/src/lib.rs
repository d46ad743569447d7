//! C ABI over `squeezelab`.
//!
//! Every fallible function returns an [`SqzStatus`]; results go through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`sqz_last_error_message`]. Kernels and supermode sets are opaque handles
//! released with their `_free` function. Arrays are caller-allocated:
//! functions that fill a buffer take its length and report
//! `SQZ_STATUS_BUFFER_TOO_SMALL` when it does not fit.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use squeezelab::cluster::{ghz_covariance, joint_variances};
use squeezelab::kernellab::{build_modulated, realistic_spopo_kernel, Harmonic, KernelMatrix, ModulatedKernelSpec};
use squeezelab::opodyn::{threshold_pump, v_minus, v_plus};
use squeezelab::pumps::PumpSpectrum;
use squeezelab::supermodes::{solve_fredholm_with, SolveOptions, SupermodeSet};
use squeezelab::transverse::{
    chi_overlap, mixing_angle_null, mixing_angle_opposite, GaussComponent, LGFamily, MultiGaussPump,
};
use squeezelab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzStatus {
    Ok = 0,
    InvalidArgument = 1,
    AxisTooNarrow = 2,
    AboveThreshold = 3,
    DegeneratePump = 4,
    Singular = 5,
    ZeroReference = 6,
    Numerical = 7,
    Config = 8,
    Io = 9,
    NullPointer = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzPumpKind {
    Gaussian = 0,
    Rectangular = 1,
}

/// Opaque sampled kernel.
pub struct SqzKernel(KernelMatrix);

/// Opaque set of supermodes.
pub struct SqzSupermodes(SupermodeSet);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into_bytes());
}

fn status_of(e: &Error) -> SqzStatus {
    match e {
        Error::InvalidArgument(_) => SqzStatus::InvalidArgument,
        Error::AxisTooNarrow { .. } => SqzStatus::AxisTooNarrow,
        Error::AboveThreshold(_) => SqzStatus::AboveThreshold,
        Error::DegeneratePump(..) => SqzStatus::DegeneratePump,
        Error::Singular { .. } => SqzStatus::Singular,
        Error::ZeroReference => SqzStatus::ZeroReference,
        Error::Numerical(_) => SqzStatus::Numerical,
        Error::Config(_) => SqzStatus::Config,
        Error::Io(_) => SqzStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Short { needed: usize, given: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SqzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SqzStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SqzStatus::NullPointer
        }
        Ok(Err(Failure::Short { needed, given })) => {
            set_error(format!("buffer holds {given} values, {needed} needed"));
            SqzStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            SqzStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn input<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn array<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn fill(dst: *mut f64, len: usize, src: &[f64]) -> Result<(), Failure> {
    if len < src.len() {
        return Err(Failure::Short {
            needed: src.len(),
            given: len,
        });
    }
    if src.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(Failure::Null("output buffer"));
    }
    slice::from_raw_parts_mut(dst, src.len()).copy_from_slice(src);
    Ok(())
}

/// Length in bytes of the calling thread's last error message.
#[no_mangle]
pub extern "C" fn sqz_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copy the last error message into `buf` as a NUL-terminated string,
/// truncating to `len − 1` bytes. Returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn sqz_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Modulated Gaussian kernel `K₊(x + x′) K₋(x − x′)` on an axis of
/// `n_points` samples sized from the widths. Harmonics are given as
/// parallel arrays of amplitudes and frequencies; the first frequency of
/// each side must be 0.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sqz_kernel_modulated(
    sigma_plus: f64,
    sigma_minus: f64,
    plus_b: *const f64,
    plus_beta: *const f64,
    n_plus: usize,
    minus_b: *const f64,
    minus_beta: *const f64,
    n_minus: usize,
    n_points: usize,
    out_kernel: *mut *mut SqzKernel,
) -> SqzStatus {
    guard(|| {
        let slot = out(out_kernel, "out_kernel")?;
        let terms = |b: &[f64], beta: &[f64]| b.iter().zip(beta).map(|(&b, &beta)| Harmonic::new(b, beta)).collect();
        let spec = ModulatedKernelSpec::new(
            sigma_plus,
            sigma_minus,
            terms(array(plus_b, n_plus, "plus_b")?, array(plus_beta, n_plus, "plus_beta")?),
            terms(array(minus_b, n_minus, "minus_b")?, array(minus_beta, n_minus, "minus_beta")?),
        )?;
        let k = build_modulated(&spec, &spec.default_axis(n_points)?)?;
        *slot = Box::into_raw(Box::new(SqzKernel(k)));
        Ok(())
    })
}

/// Single-crystal SPOPO kernel; `tau1` and `tau_p` share a time unit and
/// the axis is in units of `1/tau1`. `pump_kind` takes an `SqzPumpKind` value.
#[no_mangle]
pub unsafe extern "C" fn sqz_kernel_spopo(
    tau1: f64,
    pump_kind: i32,
    tau_p: f64,
    n_points: usize,
    out_kernel: *mut *mut SqzKernel,
) -> SqzStatus {
    guard(|| {
        let slot = out(out_kernel, "out_kernel")?;
        let pump = match pump_kind {
            k if k == SqzPumpKind::Gaussian as i32 => PumpSpectrum::Gaussian { tau_p },
            k if k == SqzPumpKind::Rectangular as i32 => PumpSpectrum::Rectangular { tau_p },
            other => return Err(Error::InvalidArgument(format!("unknown pump kind {other}")).into()),
        };
        let k = realistic_spopo_kernel(tau1, &pump, n_points)?;
        *slot = Box::into_raw(Box::new(SqzKernel(k)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sqz_kernel_free(kernel: *mut SqzKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Number of axis samples; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn sqz_kernel_dim(kernel: *const SqzKernel) -> usize {
    kernel.as_ref().map_or(0, |k| k.0.dim())
}

/// Axis sample positions, `dim` values.
#[no_mangle]
pub unsafe extern "C" fn sqz_kernel_axis(kernel: *const SqzKernel, buf: *mut f64, len: usize) -> SqzStatus {
    guard(|| fill(buf, len, input(kernel, "kernel")?.0.axis().points()))
}

/// Kernel samples, `dim × dim` row-major.
#[no_mangle]
pub unsafe extern "C" fn sqz_kernel_values(kernel: *const SqzKernel, buf: *mut f64, len: usize) -> SqzStatus {
    guard(|| fill(buf, len, input(kernel, "kernel")?.0.values().as_slice()))
}

/// Diagonalize; eigenvalues below `floor · |Λ₁|` are dropped. With
/// `eigenfunctions == 0` only the spectrum is computed.
#[no_mangle]
pub unsafe extern "C" fn sqz_supermodes_solve(
    kernel: *const SqzKernel,
    floor: f64,
    eigenfunctions: i32,
    out_modes: *mut *mut SqzSupermodes,
) -> SqzStatus {
    guard(|| {
        let slot = out(out_modes, "out_modes")?;
        let k = input(kernel, "kernel")?;
        let set = solve_fredholm_with(
            &k.0,
            &SolveOptions {
                floor,
                eigenfunctions: eigenfunctions != 0,
                max_modes: None,
            },
        )?;
        *slot = Box::into_raw(Box::new(SqzSupermodes(set)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sqz_supermodes_free(modes: *mut SqzSupermodes) {
    if !modes.is_null() {
        drop(Box::from_raw(modes));
    }
}

/// Number of retained supermodes; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn sqz_supermodes_count(modes: *const SqzSupermodes) -> usize {
    modes.as_ref().map_or(0, |m| m.0.len())
}

/// Eigenvalues sorted by magnitude, `count` values.
#[no_mangle]
pub unsafe extern "C" fn sqz_supermodes_eigenvalues(
    modes: *const SqzSupermodes,
    buf: *mut f64,
    len: usize,
) -> SqzStatus {
    guard(|| fill(buf, len, input(modes, "modes")?.0.eigenvalues()))
}

/// Eigenfunction `index` (0-based) sampled on the kernel axis.
#[no_mangle]
pub unsafe extern "C" fn sqz_supermodes_mode(
    modes: *const SqzSupermodes,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> SqzStatus {
    guard(|| {
        let set = &input(modes, "modes")?.0;
        let f = set.eigenfunction(index).ok_or_else(|| {
            Error::InvalidArgument(if set.has_eigenfunctions() {
                format!("mode {index} out of range (count {})", set.len())
            } else {
                "solved without eigenfunctions".to_string()
            })
        })?;
        fill(buf, len, f)
    })
}

/// Pump parameter at threshold, `1/|Λ₁|`.
#[no_mangle]
pub unsafe extern "C" fn sqz_supermodes_threshold(modes: *const SqzSupermodes, out_value: *mut f64) -> SqzStatus {
    guard(|| {
        *out(out_value, "out_value")? = threshold_pump(&input(modes, "modes")?.0)?;
        Ok(())
    })
}

/// Squeezed-quadrature noise at normalized pump `r` and frequency `omega`.
#[no_mangle]
pub extern "C" fn sqz_v_minus(r: f64, omega: f64) -> f64 {
    v_minus(r, omega)
}

/// Anti-squeezed-quadrature noise.
#[no_mangle]
pub extern "C" fn sqz_v_plus(r: f64, omega: f64) -> f64 {
    v_plus(r, omega)
}

/// Coupling `χ_l` of family `f` (signal spot size `w_s`) with a pump made of
/// `n` Gaussian beams of relative widths `rhos` and amplitudes `amps`.
#[no_mangle]
pub unsafe extern "C" fn sqz_chi_overlap(
    f: usize,
    w_s: f64,
    l: usize,
    amps: *const f64,
    rhos: *const f64,
    n: usize,
    out_value: *mut f64,
) -> SqzStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let fam = LGFamily::with_spot_size(f, w_s)?;
        let comps = array(amps, n, "amps")?
            .iter()
            .zip(array(rhos, n, "rhos")?)
            .map(|(&amplitude, &rho)| GaussComponent { amplitude, rho })
            .collect();
        *slot = chi_overlap(&fam, l, &MultiGaussPump::new(comps)?)?;
        Ok(())
    })
}

/// Angle θ of the pump `G_a cos θ − G_b sin θ` giving `χ₁ = 0` in family 3.
#[no_mangle]
pub unsafe extern "C" fn sqz_mixing_angle_null(rho_a: f64, rho_b: f64, out_theta: *mut f64) -> SqzStatus {
    guard(|| {
        *out(out_theta, "out_theta")? = mixing_angle_null(rho_a, rho_b)?;
        Ok(())
    })
}

/// Angle θ giving `χ₁ = −χ₃` in family 3.
#[no_mangle]
pub unsafe extern "C" fn sqz_mixing_angle_opposite(rho_a: f64, rho_b: f64, out_theta: *mut f64) -> SqzStatus {
    guard(|| {
        *out(out_theta, "out_theta")? = mixing_angle_opposite(rho_a, rho_b)?;
        Ok(())
    })
}

/// `2n × 2n` covariance (order `X₁..Xₙ, P₁..Pₙ`, vacuum = identity) of the
/// `n`-mode GHZ-like state from inputs squeezed by `r`, row-major.
#[no_mangle]
pub unsafe extern "C" fn sqz_ghz_covariance(n: usize, r: f64, buf: *mut f64, len: usize) -> SqzStatus {
    guard(|| {
        let v = ghz_covariance(n, r)?;
        let flat: Vec<f64> = v.to_rows().into_iter().flatten().collect();
        fill(buf, len, &flat)
    })
}

/// `Var(ΣX)` and the largest `Var(P_j − P_{j+1})` of the GHZ-like state.
#[no_mangle]
pub unsafe extern "C" fn sqz_ghz_joint_variances(
    n: usize,
    r: f64,
    out_var_sum_x: *mut f64,
    out_max_var_p_diff: *mut f64,
) -> SqzStatus {
    guard(|| {
        let a = out(out_var_sum_x, "out_var_sum_x")?;
        let b = out(out_max_var_p_diff, "out_max_var_p_diff")?;
        let jv = joint_variances(&ghz_covariance(n, r)?);
        *a = jv.var_sum_x;
        *b = jv.max_var_p_diff;
        Ok(())
    })
}
