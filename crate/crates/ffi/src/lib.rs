//! C ABI over the `fiberwalk` sampler.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every function returns an [`FwStatus`]; on failure the
//! message is available from [`fw_last_error_message`] on the same thread.
//! Strings returned through out-parameters are released with
//! [`fw_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use fiberwalk::bundle::{self, Bundle};
use fiberwalk::sampler::auto_steps;
use fiberwalk::{
    build_sampler, prepare_base, Error, ModelInstance, MoveSet, SampleOptions, SamplerGraph,
    Strategy,
};

/// Status codes. `1`, `2` and `3` match the exit codes of the command-line tool.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FwStatus {
    Ok = 0,
    InvalidArgument = 1,
    Infeasible = 2,
    CertificationFailed = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FwStrategy {
    Complete = 0,
    Moves = 1,
    MovesSquared = 2,
}

/// Sizes and certified second eigenvalues of a built sampler.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FwSamplerInfo {
    pub m: u64,
    pub seed: u64,
    pub dim: usize,
    pub n_s: usize,
    pub n_h: usize,
    pub d_h: usize,
    pub n_e: usize,
    pub num_vertices: usize,
    pub degree: usize,
    pub lambda_h: f64,
    pub lambda_e: f64,
    pub lambda_target: f64,
    pub lambda_bound: f64,
}

/// A validated model instance.
pub struct FwInstance(ModelInstance);

/// A built sampler graph.
pub struct FwSampler(SamplerGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FwStatus {
    match e.exit_code() {
        1 => FwStatus::InvalidArgument,
        3 => FwStatus::CertificationFailed,
        _ => FwStatus::Infeasible,
    }
}

enum Failure {
    Core(Error),
    Status(FwStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(FwStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FwStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FwStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            FwStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(FwStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s)
        .expect("library strings contain no nul bytes")
        .into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn fw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn fw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fw_instance_from_json(
    json: *const c_char,
    out_instance: *mut *mut FwInstance,
) -> FwStatus {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        let inst = ModelInstance::from_json(str_arg(json, "json")?)?;
        *slot = Box::into_raw(Box::new(FwInstance(inst)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fw_instance_from_file(
    path: *const c_char,
    out_instance: *mut *mut FwInstance,
) -> FwStatus {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        let inst = ModelInstance::load(str_arg(path, "path")?)?;
        *slot = Box::into_raw(Box::new(FwInstance(inst)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fw_instance_dim(
    instance: *const FwInstance,
    out_dim: *mut usize,
) -> FwStatus {
    guard(|| {
        *out(out_dim, "out_dim")? = handle(instance, "instance")?.0.dim();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fw_instance_free(instance: *mut FwInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Builds `G_m` for the instance. `moves` holds `num_moves` row-major moves
/// of length `dim` and is ignored for `FW_STRATEGY_COMPLETE`. A
/// `lambda_target` that is not positive selects the default target.
#[no_mangle]
pub unsafe extern "C" fn fw_sampler_build(
    instance: *const FwInstance,
    strategy: FwStrategy,
    moves: *const i64,
    num_moves: usize,
    m: u64,
    seed: u64,
    lambda_target: f64,
    out_sampler: *mut *mut FwSampler,
) -> FwStatus {
    guard(|| {
        let slot = out(out_sampler, "out_sampler")?;
        let inst = &handle(instance, "instance")?.0;
        let strategy = match strategy {
            FwStrategy::Complete => Strategy::Complete,
            FwStrategy::Moves | FwStrategy::MovesSquared => {
                if moves.is_null() {
                    return Err(null("moves"));
                }
                let d = inst.dim();
                let flat = std::slice::from_raw_parts(moves, num_moves * d);
                let set = MoveSet::new(flat.chunks(d).map(<[i64]>::to_vec).collect())?;
                if strategy == FwStrategy::Moves {
                    Strategy::Moves(set)
                } else {
                    Strategy::MovesSquared(set)
                }
            }
        };
        let target = (lambda_target > 0.0).then_some(lambda_target);
        let base = Arc::new(prepare_base(inst, strategy)?);
        let s = build_sampler(&base, m, seed, target)?;
        *slot = Box::into_raw(Box::new(FwSampler(s)));
        Ok(())
    })
}

/// Loads a sampler bundle directory written by [`fw_sampler_save`] or the
/// command-line `build -o`.
#[no_mangle]
pub unsafe extern "C" fn fw_sampler_load(
    dir: *const c_char,
    out_sampler: *mut *mut FwSampler,
) -> FwStatus {
    guard(|| {
        let slot = out(out_sampler, "out_sampler")?;
        match bundle::load(str_arg(dir, "dir")?)? {
            Bundle::Sampler(s) => {
                *slot = Box::into_raw(Box::new(FwSampler(s)));
                Ok(())
            }
            Bundle::Base(_) => Err(Failure::Status(
                FwStatus::InvalidArgument,
                "bundle holds no sampler".into(),
            )),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fw_sampler_save(
    sampler: *const FwSampler,
    dir: *const c_char,
) -> FwStatus {
    guard(|| {
        bundle::save_sampler(&handle(sampler, "sampler")?.0, str_arg(dir, "dir")?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fw_sampler_free(sampler: *mut FwSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fw_sampler_info(
    sampler: *const FwSampler,
    out_info: *mut FwSamplerInfo,
) -> FwStatus {
    guard(|| {
        let slot = out(out_info, "out_info")?;
        let s = &handle(sampler, "sampler")?.0;
        let base = s.base();
        *slot = FwSamplerInfo {
            m: s.m(),
            seed: s.seed(),
            dim: s.dim(),
            n_s: base.instance().offsets().len(),
            n_h: base.n_h(),
            d_h: base.d_h(),
            n_e: s.n_e(),
            num_vertices: s.num_vertices(),
            degree: s.graph().k(),
            lambda_h: base.lambda_h(),
            lambda_e: s.lambda_e(),
            lambda_target: s.lambda_target(),
            lambda_bound: s.lambda_bound(),
        };
        Ok(())
    })
}

/// Least `T` with `(lambda_E + lambda_H)^T <= 1e-4`.
#[no_mangle]
pub unsafe extern "C" fn fw_sampler_auto_steps(
    sampler: *const FwSampler,
    out_steps: *mut u64,
) -> FwStatus {
    guard(|| {
        let slot = out(out_steps, "out_steps")?;
        *slot = auto_steps(handle(sampler, "sampler")?.0.lambda_bound())?;
        Ok(())
    })
}

fn draw(
    s: &SamplerGraph,
    count: usize,
    steps: u64,
    seed: u64,
    max_blocks: usize,
    exact_oracle: bool,
) -> Result<Vec<fiberwalk::RationalPoint>, Failure> {
    let opts = SampleOptions {
        count,
        steps,
        seed,
        max_blocks,
        exact_oracle,
    };
    Ok(s.sample_many(&opts)?)
}

/// Draws `count` points into `out_coords` as `count * dim` row-major doubles.
/// `out_len` is the capacity of `out_coords` in doubles.
#[no_mangle]
pub unsafe extern "C" fn fw_sampler_sample(
    sampler: *const FwSampler,
    count: usize,
    steps: u64,
    seed: u64,
    max_blocks: usize,
    exact_oracle: bool,
    out_coords: *mut f64,
    out_len: usize,
) -> FwStatus {
    guard(|| {
        let s = &handle(sampler, "sampler")?.0;
        if out_coords.is_null() {
            return Err(null("out_coords"));
        }
        let need = count * s.dim();
        if out_len < need {
            return Err(Failure::Status(
                FwStatus::BufferTooSmall,
                format!("need {need} doubles, buffer holds {out_len}"),
            ));
        }
        let points = draw(s, count, steps, seed, max_blocks, exact_oracle)?;
        let buf = std::slice::from_raw_parts_mut(out_coords, need);
        for (slot, x) in buf.iter_mut().zip(points.iter().flat_map(|p| p.to_f64())) {
            *slot = x;
        }
        Ok(())
    })
}

/// Draws `count` points as CSV text with exact rational coordinates.
#[no_mangle]
pub unsafe extern "C" fn fw_sampler_sample_csv(
    sampler: *const FwSampler,
    count: usize,
    steps: u64,
    seed: u64,
    max_blocks: usize,
    exact_oracle: bool,
    out_csv: *mut *mut c_char,
) -> FwStatus {
    guard(|| {
        let slot = out(out_csv, "out_csv")?;
        let s = &handle(sampler, "sampler")?.0;
        let points = draw(s, count, steps, seed, max_blocks, exact_oracle)?;
        let mut text = String::new();
        for p in &points {
            text.push_str(&p.to_strings().join(","));
            text.push('\n');
        }
        *slot = c_string(text);
        Ok(())
    })
}

/// Point of a vertex of `G_m` as comma-separated exact rationals.
#[no_mangle]
pub unsafe extern "C" fn fw_sampler_decode(
    sampler: *const FwSampler,
    vertex: usize,
    out_point: *mut *mut c_char,
) -> FwStatus {
    guard(|| {
        let slot = out(out_point, "out_point")?;
        let p = handle(sampler, "sampler")?.0.decode_vertex(vertex)?;
        *slot = c_string(p.to_strings().join(","));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fw_sampler_is_relevant(
    sampler: *const FwSampler,
    vertex: usize,
    out_relevant: *mut bool,
) -> FwStatus {
    guard(|| {
        let slot = out(out_relevant, "out_relevant")?;
        *slot = handle(sampler, "sampler")?.0.is_relevant(vertex)?;
        Ok(())
    })
}

/// Exact fraction of irrelevant vertices as `p/q`.
#[no_mangle]
pub unsafe extern "C" fn fw_sampler_irrelevant_fraction(
    sampler: *const FwSampler,
    out_fraction: *mut *mut c_char,
) -> FwStatus {
    guard(|| {
        let slot = out(out_fraction, "out_fraction")?;
        *slot = c_string(
            handle(sampler, "sampler")?
                .0
                .irrelevant_fraction()?
                .to_string(),
        );
        Ok(())
    })
}
