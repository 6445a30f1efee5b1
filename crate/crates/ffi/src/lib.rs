//! C ABI over `starheat`.
//!
//! Objects are exposed as opaque handles created by `sh_*_new`/`sh_*_create`
//! functions and released with the matching `sh_*_free`. Every fallible
//! function returns an [`ShStatus`]; on failure a message is available from
//! [`sh_last_error`] on the same thread. Complex arrays are passed as separate
//! real and imaginary parts; an imaginary pointer may be null for real input.
//! Matrices are row-major.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use starheat::boundary_space::{make_projection_2, make_projection_3, projection_from_basis};
use starheat::discretization::assemble;
use starheat::evolution::SpectralPropagator;
use starheat::spectral::eigenpairs;
use starheat::{CMatrix, CVector, CouplingMatrix, DiscreteSystem, Error, FarEnd, ProjectionMatrix, StarConfig, Variant, C64};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimMismatch = 3,
    DependentInput = 4,
    InvalidProjection = 5,
    InvalidCoupling = 6,
    TooLarge = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShVariant {
    TraceDynamic = 0,
    Robin = 1,
    FluxDynamic = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShFarEnd {
    Neumann = 0,
    Dirichlet = 1,
}

/// Opaque projection handle.
pub struct ShProjection(ProjectionMatrix);
/// Opaque coupling-matrix handle.
pub struct ShCoupling(CouplingMatrix);
/// Opaque assembled-system handle.
pub struct ShSystem {
    sys: DiscreteSystem,
    propagator: Option<SpectralPropagator>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ShStatus {
    match e {
        Error::DimMismatch { .. } | Error::LayoutMismatch(_) | Error::RankMismatch(..) => ShStatus::DimMismatch,
        Error::DependentInput { .. } => ShStatus::DependentInput,
        Error::InvalidProjection(_) => ShStatus::InvalidProjection,
        Error::InvalidCoupling(_) => ShStatus::InvalidCoupling,
        Error::TooLarge { .. } | Error::DimensionTooLarge(_) => ShStatus::TooLarge,
        Error::SingularSystem
        | Error::Overflow
        | Error::EigFailure(_)
        | Error::ConvergenceFailure(_) => ShStatus::Numerical,
        _ => ShStatus::InvalidArgument,
    }
}

fn fail(status: ShStatus, msg: impl Into<String>) -> ShStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, translating library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ShStatus>) -> ShStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ShStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(ShStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: starheat::Result<T>) -> Result<T, ShStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, ShStatus> {
    p.as_ref().ok_or_else(|| fail(ShStatus::NullPointer, "null handle"))
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, ShStatus> {
    p.as_mut().ok_or_else(|| fail(ShStatus::NullPointer, "null output pointer"))
}

unsafe fn read_complex(re: *const f64, im: *const f64, len: usize) -> Result<Vec<C64>, ShStatus> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() {
        return Err(fail(ShStatus::NullPointer, "null real-part array"));
    }
    let re = std::slice::from_raw_parts(re, len);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, len)) };
    Ok((0..len).map(|i| C64::new(re[i], im.map_or(0.0, |v| v[i]))).collect())
}

unsafe fn write_complex(values: &[C64], re: *mut f64, im: *mut f64, capacity: usize) -> Result<(), ShStatus> {
    if capacity < values.len() {
        return Err(fail(
            ShStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, need {}", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if re.is_null() || im.is_null() {
        return Err(fail(ShStatus::NullPointer, "null output array"));
    }
    let re = std::slice::from_raw_parts_mut(re, values.len());
    let im = std::slice::from_raw_parts_mut(im, values.len());
    for (i, z) in values.iter().enumerate() {
        re[i] = z.re;
        im[i] = z.im;
    }
    Ok(())
}

fn write_bool(out: *mut bool, v: bool) -> Result<(), ShStatus> {
    unsafe { *out_ptr(out)? = v };
    Ok(())
}

fn row_major(m: &CMatrix) -> Vec<C64> {
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Projection for the planar family (N = 2).
#[no_mangle]
pub unsafe extern "C" fn sh_projection_planar(xi: f64, out: *mut *mut ShProjection) -> ShStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if !xi.is_finite() {
            return Err(fail(ShStatus::InvalidArgument, "angle must be finite"));
        }
        *out = Box::into_raw(Box::new(ShProjection(make_projection_2(xi))));
        Ok(())
    })
}

/// Projection for the spherical family (N = 3).
#[no_mangle]
pub unsafe extern "C" fn sh_projection_spherical(xi: f64, phi: f64, out: *mut *mut ShProjection) -> ShStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if !(xi.is_finite() && phi.is_finite()) {
            return Err(fail(ShStatus::InvalidArgument, "angles must be finite"));
        }
        *out = Box::into_raw(Box::new(ShProjection(make_projection_3(xi, phi))));
        Ok(())
    })
}

/// Projection onto the span of `count` vectors of length `dim`, stored
/// consecutively in `re`/`im`.
#[no_mangle]
pub unsafe extern "C" fn sh_projection_from_basis(
    re: *const f64,
    im: *const f64,
    count: usize,
    dim: usize,
    out: *mut *mut ShProjection,
) -> ShStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if dim == 0 {
            return Err(fail(ShStatus::InvalidArgument, "dimension must be positive"));
        }
        let len = count
            .checked_mul(dim)
            .ok_or_else(|| fail(ShStatus::InvalidArgument, "size overflow"))?;
        let flat = read_complex(re, im, len)?;
        let vectors: Vec<CVector> = flat.chunks(dim).map(CVector::from_column_slice).collect();
        let p = if vectors.is_empty() {
            ProjectionMatrix::zero(dim)
        } else {
            lib(projection_from_basis(&vectors))?
        };
        *out = Box::into_raw(Box::new(ShProjection(p)));
        Ok(())
    })
}

/// Projection from a full `dim × dim` matrix; rejects non-projections.
#[no_mangle]
pub unsafe extern "C" fn sh_projection_from_matrix(
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut ShProjection,
) -> ShStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let flat = read_complex(re, im, dim * dim)?;
        let m = CMatrix::from_row_slice(dim, dim, &flat);
        let p = lib(ProjectionMatrix::new(m, starheat::DEFAULT_TOL))?;
        lib(p.validate())?;
        *out = Box::into_raw(Box::new(ShProjection(p)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sh_projection_free(p: *mut ShProjection) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension N, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn sh_projection_dim(p: *const ShProjection) -> usize {
    p.as_ref().map_or(0, |p| p.0.dim())
}

#[no_mangle]
pub unsafe extern "C" fn sh_projection_rank(p: *const ShProjection) -> usize {
    p.as_ref().map_or(0, |p| p.0.rank())
}

/// Copies the N² entries row-major into `re`/`im` (capacity `len`).
#[no_mangle]
pub unsafe extern "C" fn sh_projection_entries(
    p: *const ShProjection,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> ShStatus {
    guard(|| {
        let p = deref(p)?;
        write_complex(&row_major(p.0.matrix()), re, im, len)
    })
}

#[no_mangle]
pub unsafe extern "C" fn sh_projection_is_positive(p: *const ShProjection, out: *mut bool) -> ShStatus {
    guard(|| write_bool(out, deref(p)?.0.is_positive()))
}

#[no_mangle]
pub unsafe extern "C" fn sh_projection_is_linf_contractive(p: *const ShProjection, out: *mut bool) -> ShStatus {
    guard(|| write_bool(out, deref(p)?.0.is_linf_contractive()))
}

#[no_mangle]
pub unsafe extern "C" fn sh_projection_is_real_preserving(p: *const ShProjection, out: *mut bool) -> ShStatus {
    guard(|| write_bool(out, deref(p)?.0.is_real_preserving()))
}

#[no_mangle]
pub unsafe extern "C" fn sh_projection_is_irreducible(p: *const ShProjection, out: *mut bool) -> ShStatus {
    guard(|| {
        let v = lib(deref(p)?.0.is_irreducible())?;
        write_bool(out, v)
    })
}

/// Row sums of |P|, written to `out` (capacity `len`).
#[no_mangle]
pub unsafe extern "C" fn sh_projection_row_sums(p: *const ShProjection, out: *mut f64, len: usize) -> ShStatus {
    guard(|| {
        let sums = deref(p)?.0.row_sum_functions();
        if len < sums.len() {
            return Err(fail(ShStatus::BufferTooSmall, "row-sum buffer too small"));
        }
        if out.is_null() {
            return Err(fail(ShStatus::NullPointer, "null output array"));
        }
        std::slice::from_raw_parts_mut(out, sums.len()).copy_from_slice(&sums);
        Ok(())
    })
}

/// Coupling matrix from `dim × dim` row-major entries.
#[no_mangle]
pub unsafe extern "C" fn sh_coupling_new(
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut ShCoupling,
) -> ShStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let flat = read_complex(re, im, dim * dim)?;
        let s = lib(CouplingMatrix::new(CMatrix::from_row_slice(dim, dim, &flat)))?;
        *out = Box::into_raw(Box::new(ShCoupling(s)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sh_coupling_zero(dim: usize, out: *mut *mut ShCoupling) -> ShStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = Box::into_raw(Box::new(ShCoupling(CouplingMatrix::zero(dim))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sh_coupling_free(s: *mut ShCoupling) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn sh_coupling_is_accretive(s: *const ShCoupling, out: *mut bool) -> ShStatus {
    guard(|| write_bool(out, deref(s)?.0.is_accretive()))
}

#[no_mangle]
pub unsafe extern "C" fn sh_coupling_generates_positive(s: *const ShCoupling, out: *mut bool) -> ShStatus {
    guard(|| write_bool(out, deref(s)?.0.generates_positive_semigroup()))
}

#[no_mangle]
pub unsafe extern "C" fn sh_coupling_generates_linf_contractive(s: *const ShCoupling, out: *mut bool) -> ShStatus {
    guard(|| write_bool(out, deref(s)?.0.generates_linf_contractive_semigroup()))
}

/// Assembles the discretized star with `cells` elements per edge.
/// `delta_re`/`delta_im` are used only by the flux variant.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sh_system_assemble(
    p: *const ShProjection,
    s: *const ShCoupling,
    length: f64,
    cells: usize,
    variant: ShVariant,
    far_end: ShFarEnd,
    delta_re: f64,
    delta_im: f64,
    out: *mut *mut ShSystem,
) -> ShStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let (p, s) = (deref(p)?, deref(s)?);
        let variant = match variant {
            ShVariant::TraceDynamic => Variant::TraceDynamic,
            ShVariant::Robin => Variant::Robin,
            ShVariant::FluxDynamic => Variant::FluxDynamic {
                delta: C64::new(delta_re, delta_im),
            },
        };
        let far_end = match far_end {
            ShFarEnd::Neumann => FarEnd::Neumann,
            ShFarEnd::Dirichlet => FarEnd::Dirichlet,
        };
        let cfg = StarConfig::new(p.0.dim(), length, cells, variant).with_far_end(far_end);
        lib(cfg.validate())?;
        let sys = lib(assemble(&cfg, &p.0, &s.0))?;
        *out = Box::into_raw(Box::new(ShSystem { sys, propagator: None }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sh_system_free(s: *mut ShSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of degrees of freedom, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn sh_system_dofs(s: *const ShSystem) -> usize {
    s.as_ref().map_or(0, |s| s.sys.dofs())
}

/// Smallest `count` eigenvalues by real part.
#[no_mangle]
pub unsafe extern "C" fn sh_system_eigenvalues(
    s: *const ShSystem,
    count: usize,
    re: *mut f64,
    im: *mut f64,
) -> ShStatus {
    guard(|| {
        let s = deref(s)?;
        let spectrum = lib(eigenpairs(&s.sys, count))?;
        write_complex(&spectrum.eigenvalues, re, im, count)
    })
}

/// Constant state `1` in discrete coordinates (length `sh_system_dofs`).
#[no_mangle]
pub unsafe extern "C" fn sh_system_constant_state(s: *const ShSystem, re: *mut f64, im: *mut f64, len: usize) -> ShStatus {
    guard(|| {
        let s = deref(s)?;
        write_complex(s.sys.constant_state().as_slice(), re, im, len)
    })
}

/// Applies the exact propagator at time `t` to a state of length `len`
/// (which must equal `sh_system_dofs`). The eigendecomposition is computed
/// on first use and cached in the handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sh_system_propagate(
    s: *mut ShSystem,
    t: f64,
    in_re: *const f64,
    in_im: *const f64,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ShStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| fail(ShStatus::NullPointer, "null handle"))?;
        if len != s.sys.dofs() {
            return Err(fail(
                ShStatus::DimMismatch,
                format!("state has length {len}, system has {} dofs", s.sys.dofs()),
            ));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(fail(ShStatus::InvalidArgument, "time must be finite and nonnegative"));
        }
        let v = CVector::from_vec(read_complex(in_re, in_im, len)?);
        if s.propagator.is_none() {
            s.propagator = Some(lib(SpectralPropagator::new(&s.sys))?);
        }
        let w = lib(s.propagator.as_ref().expect("initialized above").apply(t, &v))?;
        write_complex(w.as_slice(), out_re, out_im, len)
    })
}
