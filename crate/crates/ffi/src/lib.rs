//! C ABI for `curvedseq`.
//!
//! Every fallible function returns a [`CsqStatus`]; on failure the message is
//! available from [`csq_last_error`] on the same thread. Objects are opaque
//! handles created by `*_new` and released by the matching `*_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use curvedseq::geometry::{embed, CurvedFamily, Model, UCoord};
use curvedseq::inference::{
    nonseq_statistic, SequentialPlan, StoppingConfig, SuffStats, TestDesign, TestOutcome, TestVariant,
};
use curvedseq::numeric::RngStream;
use curvedseq::power::{coefficients, PowerContext};
use curvedseq::sampling::Sampler;
use curvedseq::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsqStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    Quadrature = 4,
    Singular = 5,
    Degenerate = 6,
    Unsupported = 7,
    FiniteDifference = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsqModel {
    Vmf = 0,
    Hyperboloid = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsqTest {
    Mlt = 0,
    Wald = 1,
    Lrt = 2,
    Est = 3,
    /// Uses the `k1`, `k2` arguments.
    Designed = 4,
}

/// Power-loss coefficients at one `(m, alpha, s)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsqCoefficients {
    pub xi0: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Outcome of a single test. `tau` is 0 for fixed-sample tests.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsqOutcome {
    pub statistic: f64,
    pub reject: bool,
    pub tau: u64,
    pub truncated: bool,
}

pub struct CsqFamily(CurvedFamily);
pub struct CsqStream(RngStream);
pub struct CsqSequentialPlan(SequentialPlan);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CsqStatus {
    match e {
        Error::Domain(_) => CsqStatus::Domain,
        Error::Config(_) => CsqStatus::Config,
        Error::Quadrature { .. } => CsqStatus::Quadrature,
        Error::Singular(_) => CsqStatus::Singular,
        Error::Degenerate(_) => CsqStatus::Degenerate,
        Error::Unsupported(_) => CsqStatus::Unsupported,
        Error::FiniteDifference(_) => CsqStatus::FiniteDifference,
        Error::Io(_) => CsqStatus::Io,
    }
}

struct Null;

enum Fail {
    Null,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

impl From<Null> for Fail {
    fn from(_: Null) -> Self {
        Fail::Null
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CsqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CsqStatus::Ok
        }
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument");
            CsqStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            CsqStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Null> {
    p.as_ref().ok_or(Null)
}

unsafe fn deref_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Null> {
    p.as_mut().ok_or(Null)
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Null> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Null);
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize) -> Result<&'a mut [f64], Null> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Null);
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn point(fam: &CurvedFamily, u: *const f64) -> Result<UCoord, Null> {
    Ok(UCoord::new(slice(u, fam.m)?.to_vec()))
}

fn outcome(o: &TestOutcome) -> CsqOutcome {
    CsqOutcome {
        statistic: o.statistic,
        reject: o.reject,
        tau: o.tau.unwrap_or(0) as u64,
        truncated: o.truncated,
    }
}

fn design(test: CsqTest, k1: f64, k2: f64, alpha: f64, u0: UCoord) -> curvedseq::Result<TestDesign> {
    let variant = match test {
        CsqTest::Mlt => TestVariant::Mlt,
        CsqTest::Wald => TestVariant::Wald,
        CsqTest::Lrt => TestVariant::Lrt,
        CsqTest::Est => TestVariant::Est,
        CsqTest::Designed => return TestDesign::designed(k1, k2, alpha, u0),
    };
    TestDesign::new(variant, alpha, u0)
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn csq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn csq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn csq_family_new(model: CsqModel, m: usize, r: f64, out: *mut *mut CsqFamily) -> CsqStatus {
    guard(|| {
        let out = deref_mut(out)?;
        let model = match model {
            CsqModel::Vmf => Model::Vmf,
            CsqModel::Hyperboloid => Model::Hyperboloid,
        };
        *out = Box::into_raw(Box::new(CsqFamily(CurvedFamily::new(model, m, r)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn csq_family_free(fam: *mut CsqFamily) {
    if !fam.is_null() {
        drop(Box::from_raw(fam));
    }
}

/// Manifold dimension `m`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn csq_family_dim(fam: *const CsqFamily) -> usize {
    fam.as_ref().map_or(0, |f| f.0.m)
}

/// Ambient dimension `m + 1`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn csq_family_ambient_dim(fam: *const CsqFamily) -> usize {
    fam.as_ref().map_or(0, |f| f.0.n())
}

/// Diagonal of the Fisher metric at `u` (length `m`) into `out_g` (length `m`).
#[no_mangle]
pub unsafe extern "C" fn csq_family_metric(fam: *const CsqFamily, u: *const f64, out_g: *mut f64) -> CsqStatus {
    guard(|| {
        let fam = &deref(fam)?.0;
        let g = fam.metric_diagonal(&point(fam, u)?)?;
        slice_mut(out_g, fam.m)?.copy_from_slice(&g);
        Ok(())
    })
}

/// Natural and expectation parameters at `u`, each of length `m + 1`.
#[no_mangle]
pub unsafe extern "C" fn csq_family_embed(
    fam: *const CsqFamily,
    u: *const f64,
    out_theta: *mut f64,
    out_eta: *mut f64,
) -> CsqStatus {
    guard(|| {
        let fam = &deref(fam)?.0;
        let (theta, eta) = embed(fam, &point(fam, u)?)?;
        slice_mut(out_theta, fam.n())?.copy_from_slice(&theta.v);
        slice_mut(out_eta, fam.n())?.copy_from_slice(&eta.v);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn csq_coefficients(m: u32, alpha: f64, s: f64, out: *mut CsqCoefficients) -> CsqStatus {
    guard(|| {
        let out = deref_mut(out)?;
        let c = coefficients(&PowerContext::new(m, alpha)?, s)?;
        *out = CsqCoefficients {
            xi0: c.xi0,
            xi1: c.xi1,
            xi2: c.xi2,
            k1: c.k1,
            k2: c.k2,
        };
        Ok(())
    })
}

/// Power-loss components of a test with proportions `(k1, k2)`.
#[no_mangle]
pub unsafe extern "C" fn csq_delta_p(
    m: u32,
    alpha: f64,
    s: f64,
    k1: f64,
    k2: f64,
    out_dp1: *mut f64,
    out_dp2: *mut f64,
) -> CsqStatus {
    guard(|| {
        let (d1, d2) = (deref_mut(out_dp1)?, deref_mut(out_dp2)?);
        (*d1, *d2) = coefficients(&PowerContext::new(m, alpha)?, s)?.delta_p(k1, k2);
        Ok(())
    })
}

/// Independent random stream `index` of `seed`. Never fails.
#[no_mangle]
pub extern "C" fn csq_stream_new(seed: u64, index: u64) -> *mut CsqStream {
    Box::into_raw(Box::new(CsqStream(RngStream::new(seed, index))))
}

#[no_mangle]
pub unsafe extern "C" fn csq_stream_free(stream: *mut CsqStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Draws `count` observations at `u` into `out`, row-major `count × (m+1)`.
#[no_mangle]
pub unsafe extern "C" fn csq_sample(
    fam: *const CsqFamily,
    u: *const f64,
    count: usize,
    stream: *mut CsqStream,
    out: *mut f64,
) -> CsqStatus {
    guard(|| {
        let fam = &deref(fam)?.0;
        let stream = &mut deref_mut(stream)?.0;
        let sampler = Sampler::new(fam, &point(fam, u)?)?;
        let out = slice_mut(out, count * fam.n())?;
        for row in out.chunks_exact_mut(fam.n()) {
            sampler.draw_into(stream, row);
        }
        Ok(())
    })
}

/// Fixed-sample test of `u = u0` from the sum of `count` observations.
#[no_mangle]
pub unsafe extern "C" fn csq_nonseq_test(
    fam: *const CsqFamily,
    test: CsqTest,
    k1: f64,
    k2: f64,
    alpha: f64,
    u0: *const f64,
    sum_x: *const f64,
    count: usize,
    out: *mut CsqOutcome,
) -> CsqStatus {
    guard(|| {
        let fam = &deref(fam)?.0;
        let out = deref_mut(out)?;
        let d = design(test, k1, k2, alpha, point(fam, u0)?)?;
        let stats = SuffStats::from_sum(slice(sum_x, fam.n())?.to_vec(), count)?;
        *out = outcome(&nonseq_statistic(fam, &d, &stats)?);
        Ok(())
    })
}

/// Sequential test of `u = u0` stopping at curvature level `k`.
#[no_mangle]
pub unsafe extern "C" fn csq_seq_plan_new(
    fam: *const CsqFamily,
    test: CsqTest,
    k1: f64,
    k2: f64,
    alpha: f64,
    u0: *const f64,
    k: f64,
    epsilon_tilde: f64,
    out: *mut *mut CsqSequentialPlan,
) -> CsqStatus {
    guard(|| {
        let fam = &deref(fam)?.0;
        let out = deref_mut(out)?;
        let d = design(test, k1, k2, alpha, point(fam, u0)?)?;
        let cfg = StoppingConfig { epsilon_tilde, ..StoppingConfig::new(k)? };
        cfg.validate()?;
        *out = Box::into_raw(Box::new(CsqSequentialPlan(SequentialPlan::new(fam, &d, &cfg)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn csq_seq_plan_free(plan: *mut CsqSequentialPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Runs one sequential trial with data drawn at `true_u`.
#[no_mangle]
pub unsafe extern "C" fn csq_seq_run(
    plan: *const CsqSequentialPlan,
    true_u: *const f64,
    stream: *mut CsqStream,
    out: *mut CsqOutcome,
) -> CsqStatus {
    guard(|| {
        let plan = &deref(plan)?.0;
        let stream = &mut deref_mut(stream)?.0;
        let out = deref_mut(out)?;
        let u = point(&plan.fam, true_u)?;
        let sampler = Sampler::new(&plan.fam, &u)?;
        *out = outcome(&plan.run(&sampler, plan.n_max(&u), stream)?);
        Ok(())
    })
}
