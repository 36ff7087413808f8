//! C ABI for the bandit library.
//!
//! Every object crossing the boundary is an opaque handle created and
//! destroyed by this library; callers never see the Rust layouts. Fallible
//! calls return a status code and store a human-readable message retrievable
//! with `tspp_last_error`. Arms cross the boundary as `u32` choice arrays of
//! length `dims` with 1-based choices, matching the library convention.

use std::cell::RefCell;
use std::ffi::CStr;
use std::os::raw::c_char;
use std::slice;

use tspp::policies::{select_arm, PolicyConfig};
use tspp::rng::derive_seed;
use tspp::simulator::{init_model, SimulatorModel};
use tspp::{DimensionSpec, Layout, PolicyRng, StateStore};

/// Status code returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsppStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Arguments failed validation; see `tspp_last_error`.
    InvalidArgument = 2,
    /// The operation itself failed; see `tspp_last_error`.
    RuntimeError = 3,
}

/// Opaque Beta-posterior state store.
pub struct TsppStore(StateStore);

/// Opaque reward simulator.
pub struct TsppModel(SimulatorModel);

/// Opaque deterministic random stream.
pub struct TsppRng(PolicyRng);

/// Opaque policy configuration.
pub struct TsppPolicy(PolicyConfig);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl ToString) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.to_string());
}

fn fail(err: tspp::Error) -> TsppStatus {
    set_error(&err);
    match err {
        tspp::Error::Spec(_) | tspp::Error::Config(_) => TsppStatus::InvalidArgument,
        _ => TsppStatus::RuntimeError,
    }
}

/// Copy the message from the most recent failure on this thread into `buf`
/// (NUL-terminated, truncated to `cap` bytes) and return the full message
/// length in bytes. `buf` may be null to query the length only.
///
/// # Safety
/// `buf` must be null or valid for `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tspp_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Derive a child seed from a master seed and two stream indices. Pure.
#[no_mangle]
pub extern "C" fn tspp_derive_seed(master: u64, replication: u64, policy: u64) -> u64 {
    derive_seed(master, replication, policy)
}

/// Create a deterministic random stream. Never fails; free with
/// `tspp_rng_free`.
#[no_mangle]
pub extern "C" fn tspp_rng_new(seed: u64, stream: u64) -> *mut TsppRng {
    Box::into_raw(Box::new(TsppRng(PolicyRng::from_seed_stream(seed, stream))))
}

/// Destroy a random stream. Null is a no-op.
///
/// # Safety
/// `rng` must be null or a pointer from `tspp_rng_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tspp_rng_free(rng: *mut TsppRng) {
    if !rng.is_null() {
        drop(unsafe { Box::from_raw(rng) });
    }
}

/// Create a posterior store for a uniform arm space of `dims` dimensions
/// with `choices` options each, maintaining keys up to `max_order` plus the
/// full-layout key when `track_full` is nonzero.
///
/// # Safety
/// `out` must be a valid pointer to a store handle slot.
#[no_mangle]
pub unsafe extern "C" fn tspp_store_new(
    dims: usize,
    choices: u32,
    max_order: usize,
    track_full: bool,
    out: *mut *mut TsppStore,
) -> TsppStatus {
    if out.is_null() {
        return TsppStatus::NullArgument;
    }
    let spec = match DimensionSpec::uniform(dims, choices) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match StateStore::new(spec, max_order, track_full) {
        Ok(store) => {
            unsafe { *out = Box::into_raw(Box::new(TsppStore(store))) };
            TsppStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Destroy a store. Null is a no-op.
///
/// # Safety
/// `store` must be null or a pointer from `tspp_store_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tspp_store_free(store: *mut TsppStore) {
    if !store.is_null() {
        drop(unsafe { Box::from_raw(store) });
    }
}

unsafe fn read_layout(choices: *const u32, len: usize) -> Option<Layout> {
    if choices.is_null() {
        return None;
    }
    Some(Layout(
        unsafe { slice::from_raw_parts(choices, len) }.to_vec(),
    ))
}

/// Back-propagate one binary reward for the arm given as `len` 1-based
/// choices.
///
/// # Safety
/// `store` must be a live store handle; `choices` must be valid for `len`
/// reads.
#[no_mangle]
pub unsafe extern "C" fn tspp_store_update(
    store: *mut TsppStore,
    choices: *const u32,
    len: usize,
    reward: u8,
) -> TsppStatus {
    let Some(store) = (unsafe { store.as_mut() }) else {
        return TsppStatus::NullArgument;
    };
    let Some(layout) = (unsafe { read_layout(choices, len) }) else {
        return TsppStatus::NullArgument;
    };
    match store.0.backpropagate(&layout, reward) {
        Ok(()) => TsppStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Number of keys currently tracked by the store.
///
/// # Safety
/// `store` must be null or a live store handle.
#[no_mangle]
pub unsafe extern "C" fn tspp_store_len(store: *const TsppStore) -> usize {
    unsafe { store.as_ref() }.map_or(0, |s| s.0.len())
}

/// Parse a policy configuration from its JSON form, e.g.
/// `{"variant":"ppf","order":2,"searches":45}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn tspp_policy_new_json(
    json: *const c_char,
    out: *mut *mut TsppPolicy,
) -> TsppStatus {
    if json.is_null() || out.is_null() {
        return TsppStatus::NullArgument;
    }
    let text = match unsafe { CStr::from_ptr(json) }.to_str() {
        Ok(t) => t,
        Err(e) => {
            set_error(format!("policy JSON is not UTF-8: {e}"));
            return TsppStatus::InvalidArgument;
        }
    };
    match serde_json::from_str::<PolicyConfig>(text) {
        Ok(policy) => {
            unsafe { *out = Box::into_raw(Box::new(TsppPolicy(policy))) };
            TsppStatus::Ok
        }
        Err(e) => {
            set_error(format!("bad policy JSON: {e}"));
            TsppStatus::InvalidArgument
        }
    }
}

/// Destroy a policy. Null is a no-op.
///
/// # Safety
/// `policy` must be null or a pointer from `tspp_policy_new_json` not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn tspp_policy_free(policy: *mut TsppPolicy) {
    if !policy.is_null() {
        drop(unsafe { Box::from_raw(policy) });
    }
}

/// Run the policy once against the store and write the selected arm's
/// 1-based choices into `out_choices` (`len` must equal the store's
/// dimension count).
///
/// # Safety
/// All handles must be live; `out_choices` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tspp_select_arm(
    policy: *const TsppPolicy,
    store: *const TsppStore,
    rng: *mut TsppRng,
    out_choices: *mut u32,
    len: usize,
) -> TsppStatus {
    let (Some(policy), Some(store), Some(rng)) = (
        unsafe { policy.as_ref() },
        unsafe { store.as_ref() },
        unsafe { rng.as_mut() },
    ) else {
        return TsppStatus::NullArgument;
    };
    if out_choices.is_null() {
        return TsppStatus::NullArgument;
    }
    if len != store.0.spec().dims() {
        set_error(format!(
            "output length {} does not match {} dimensions",
            len,
            store.0.spec().dims()
        ));
        return TsppStatus::InvalidArgument;
    }
    match select_arm(&policy.0, &store.0, &mut rng.0) {
        Ok(layout) => {
            unsafe { std::ptr::copy_nonoverlapping(layout.0.as_ptr(), out_choices, len) };
            TsppStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Build a reward simulator with random weights drawn from the given seed:
/// interaction order `order`, scaling divisor `scale`, and `order` control
/// parameters in `controls`.
///
/// # Safety
/// `controls` must be valid for `order` reads; `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn tspp_model_new(
    dims: usize,
    choices: u32,
    order: usize,
    scale: f64,
    controls: *const f64,
    seed: u64,
    out: *mut *mut TsppModel,
) -> TsppStatus {
    if controls.is_null() || out.is_null() {
        return TsppStatus::NullArgument;
    }
    let spec = match DimensionSpec::uniform(dims, choices) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let controls = unsafe { slice::from_raw_parts(controls, order) }.to_vec();
    let mut rng = PolicyRng::from_seed(seed);
    match init_model(spec, order, scale, controls, &mut rng) {
        Ok(model) => {
            unsafe { *out = Box::into_raw(Box::new(TsppModel(model))) };
            TsppStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Destroy a model. Null is a no-op.
///
/// # Safety
/// `model` must be null or a pointer from `tspp_model_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tspp_model_free(model: *mut TsppModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Success probability of the arm under the model.
///
/// # Safety
/// `model` must be live; `choices` valid for `len` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tspp_model_success_prob(
    model: *const TsppModel,
    choices: *const u32,
    len: usize,
    out: *mut f64,
) -> TsppStatus {
    let Some(model) = (unsafe { model.as_ref() }) else {
        return TsppStatus::NullArgument;
    };
    let Some(layout) = (unsafe { read_layout(choices, len) }) else {
        return TsppStatus::NullArgument;
    };
    if out.is_null() {
        return TsppStatus::NullArgument;
    }
    if let Err(e) = model.0.spec().validate_layout(&layout) {
        return fail(e);
    }
    unsafe { *out = model.0.success_prob(&layout) };
    TsppStatus::Ok
}

/// Draw one Bernoulli reward for the arm.
///
/// # Safety
/// `model` and `rng` must be live; `choices` valid for `len` reads; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tspp_model_draw_reward(
    model: *const TsppModel,
    choices: *const u32,
    len: usize,
    rng: *mut TsppRng,
    out: *mut u8,
) -> TsppStatus {
    let (Some(model), Some(rng)) = (unsafe { model.as_ref() }, unsafe { rng.as_mut() }) else {
        return TsppStatus::NullArgument;
    };
    let Some(layout) = (unsafe { read_layout(choices, len) }) else {
        return TsppStatus::NullArgument;
    };
    if out.is_null() {
        return TsppStatus::NullArgument;
    }
    if let Err(e) = model.0.spec().validate_layout(&layout) {
        return fail(e);
    }
    unsafe { *out = model.0.draw_reward(&layout, &mut rng.0) };
    TsppStatus::Ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn closed_loop_through_the_c_surface() {
        unsafe {
            let mut store: *mut TsppStore = std::ptr::null_mut();
            assert_eq!(tspp_store_new(2, 3, 2, true, &mut store), TsppStatus::Ok);
            let json = CString::new(r#"{"variant":"fpf","searches":5}"#).unwrap();
            let mut policy: *mut TsppPolicy = std::ptr::null_mut();
            assert_eq!(
                tspp_policy_new_json(json.as_ptr(), &mut policy),
                TsppStatus::Ok
            );
            let controls = [0.5, 0.25];
            let mut model: *mut TsppModel = std::ptr::null_mut();
            assert_eq!(
                tspp_model_new(2, 3, 2, 2.0, controls.as_ptr(), 99, &mut model),
                TsppStatus::Ok
            );
            let policy_rng = tspp_rng_new(7, 0);
            let env_rng = tspp_rng_new(7, 1);

            let mut arm = [0u32; 2];
            for _ in 0..50 {
                assert_eq!(
                    tspp_select_arm(policy, store, policy_rng, arm.as_mut_ptr(), 2),
                    TsppStatus::Ok
                );
                assert!(arm.iter().all(|&c| (1..=3).contains(&c)));
                let mut reward = 0u8;
                assert_eq!(
                    tspp_model_draw_reward(model, arm.as_ptr(), 2, env_rng, &mut reward),
                    TsppStatus::Ok
                );
                assert!(reward <= 1);
                assert_eq!(
                    tspp_store_update(store, arm.as_ptr(), 2, reward),
                    TsppStatus::Ok
                );
            }
            assert!(tspp_store_len(store) > 1);

            let mut p = f64::NAN;
            assert_eq!(
                tspp_model_success_prob(model, arm.as_ptr(), 2, &mut p),
                TsppStatus::Ok
            );
            assert!((0.0..=1.0).contains(&p));

            tspp_rng_free(policy_rng);
            tspp_rng_free(env_rng);
            tspp_model_free(model);
            tspp_policy_free(policy);
            tspp_store_free(store);
        }
    }

    #[test]
    fn errors_surface_as_status_and_message() {
        unsafe {
            let mut store: *mut TsppStore = std::ptr::null_mut();
            // N=1 violates the arm-space invariant.
            assert_eq!(
                tspp_store_new(2, 1, 1, false, &mut store),
                TsppStatus::InvalidArgument
            );
            let needed = tspp_last_error(std::ptr::null_mut(), 0);
            assert!(needed > 0);
            let mut buf = vec![0i8; needed + 1];
            assert_eq!(tspp_last_error(buf.as_mut_ptr(), buf.len()), needed);
            let msg = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
            assert!(!msg.is_empty());

            // Null handles are rejected, not dereferenced.
            let mut arm = [0u32; 2];
            assert_eq!(
                tspp_select_arm(
                    std::ptr::null(),
                    std::ptr::null(),
                    std::ptr::null_mut(),
                    arm.as_mut_ptr(),
                    2
                ),
                TsppStatus::NullArgument
            );
            tspp_rng_free(std::ptr::null_mut());
            tspp_store_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn derive_seed_matches_core() {
        assert_eq!(tspp_derive_seed(0, 0, 0), derive_seed(0, 0, 0));
        assert_eq!(tspp_derive_seed(0, 0, 0), 0x9d8a_d94e_903a_7741);
    }

    #[test]
    fn mismatched_output_length_is_rejected() {
        unsafe {
            let mut store: *mut TsppStore = std::ptr::null_mut();
            assert_eq!(tspp_store_new(3, 2, 1, false, &mut store), TsppStatus::Ok);
            let json = CString::new(r#"{"variant":"dmabs"}"#).unwrap();
            let mut policy: *mut TsppPolicy = std::ptr::null_mut();
            assert_eq!(
                tspp_policy_new_json(json.as_ptr(), &mut policy),
                TsppStatus::Ok
            );
            let rng = tspp_rng_new(1, 0);
            let mut arm = [0u32; 2];
            assert_eq!(
                tspp_select_arm(policy, store, rng, arm.as_mut_ptr(), 2),
                TsppStatus::InvalidArgument
            );
            tspp_rng_free(rng);
            tspp_policy_free(policy);
            tspp_store_free(store);
        }
    }
}
