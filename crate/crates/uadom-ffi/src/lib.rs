//! C ABI over the dominion workbench. Inputs are the same plain-text file
//! formats the CLI reads; structured results come back as JSON strings
//! allocated by Rust and released with `uadom_string_free`. Handles are
//! opaque; every function returns a status code, with a thread-local
//! message available through `uadom_last_error_message` after a failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use serde_json::json;

use uadom_core::algebra::{dominion_upper, FiniteAlgebra, Subalgebra};
use uadom_core::arrays::{certify_shared, verify_certificate, ArrayValidity, Verification};
use uadom_core::budget::Budget;
use uadom_core::coproduct::{build_presentation, tagged_from_term, ProveOutcome};
use uadom_core::files::{
    parse_algebra_file, parse_array_file, parse_collection_file, parse_identities_file, ArrayFile,
};
use uadom_core::model::{FactoredInt, ModelInstance};
use uadom_core::term::parse_term;
use uadom_core::tsys::{dominion_witness, is_transfer_system, GroundSet, TransferDecision};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UadomStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    BudgetExceeded = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into()).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uadom_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be a pointer previously returned by a `uadom_*` function and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uadom_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, UadomStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        return Err(UadomStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        UadomStatus::InvalidUtf8
    })
}

fn out_json(value: &serde_json::Value, out: *mut *mut c_char) -> UadomStatus {
    if out.is_null() {
        set_error("null output pointer");
        return UadomStatus::NullPointer;
    }
    let text = serde_json::to_string_pretty(value).expect("JSON serializes");
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            UadomStatus::Ok
        }
        Err(_) => {
            set_error("result contained an interior NUL");
            UadomStatus::InvalidArgument
        }
    }
}

/// An algebra with its optional designated subalgebra.
pub struct UadomAlgebra {
    alg: FiniteAlgebra,
    sub: Option<Subalgebra>,
}

/// Parses the algebra file format. On success `*out` owns the handle;
/// release it with `uadom_algebra_free`.
///
/// # Safety
/// `text` must point to a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uadom_algebra_parse(
    text: *const c_char,
    out: *mut *mut UadomAlgebra,
) -> UadomStatus {
    if out.is_null() {
        set_error("null output pointer");
        return UadomStatus::NullPointer;
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let parsed = match parse_algebra_file(text) {
        Ok(p) => p,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::ParseError;
        }
    };
    let sub = match parsed.sub_members {
        Some(members) => match Subalgebra::checked(&parsed.alg, members) {
            Ok(s) => Some(s),
            Err(e) => {
                set_error(e.to_string());
                return UadomStatus::InvalidArgument;
            }
        },
        None => None,
    };
    *out = Box::into_raw(Box::new(UadomAlgebra {
        alg: parsed.alg,
        sub,
    }));
    UadomStatus::Ok
}

/// # Safety
/// `h` must come from `uadom_algebra_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn uadom_algebra_free(h: *mut UadomAlgebra) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Carrier size of the algebra, or 0 for a NULL handle.
///
/// # Safety
/// `h` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn uadom_algebra_size(h: *const UadomAlgebra) -> usize {
    h.as_ref().map_or(0, |h| h.alg.size())
}

fn need_sub(h: &UadomAlgebra) -> Result<&Subalgebra, UadomStatus> {
    h.sub.as_ref().ok_or_else(|| {
        set_error("algebra has no `sub` line; a subalgebra is required");
        UadomStatus::InvalidArgument
    })
}

/// Congruence-closure proof of equality of two tagged terms in A⨿_B A,
/// at the given identity-instantiation depth. JSON: verdict + statistics.
///
/// # Safety
/// All pointers must be valid; `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uadom_coprod_prove(
    h: *const UadomAlgebra,
    identities_text: *const c_char,
    depth: usize,
    left: *const c_char,
    right: *const c_char,
    out: *mut *mut c_char,
) -> UadomStatus {
    let Some(h) = h.as_ref() else {
        set_error("null algebra handle");
        return UadomStatus::NullPointer;
    };
    let (ids_text, left, right) = match (read_str(identities_text), read_str(left), read_str(right))
    {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
    };
    let sub = match need_sub(h) {
        Ok(s) => s,
        Err(s) => return s,
    };
    let ids = match parse_identities_file(ids_text, h.alg.sig()) {
        Ok(i) => i,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::ParseError;
        }
    };
    let parse_tagged = |s: &str| -> Result<_, String> {
        let t = parse_term(s, h.alg.sig()).map_err(|e| e.to_string())?;
        tagged_from_term(&t, h.alg.size())
    };
    let (lt, rt) = match (parse_tagged(left), parse_tagged(right)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            set_error(e);
            return UadomStatus::ParseError;
        }
    };
    let budget = Budget::default();
    let mut p = match build_presentation(&h.alg, sub, &ids, depth, &budget) {
        Ok(p) => p,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::BudgetExceeded;
        }
    };
    let stats = p.stats();
    let v = match p.prove_equal(&lt, &rt) {
        ProveOutcome::Proven => json!({
            "verdict": "proven", "nodes": stats.nodes, "relations": stats.relations,
        }),
        ProveOutcome::Unknown { reason } => json!({
            "verdict": "unknown", "reason": reason,
            "nodes": stats.nodes, "relations": stats.relations,
        }),
    };
    out_json(&v, out)
}

/// Brute-force dominion over-approximation. JSON: members plus the indices
/// of separated elements.
///
/// # Safety
/// All pointers must be valid; `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uadom_dominion_upper(
    h: *const UadomAlgebra,
    identities_text: *const c_char,
    max_c: usize,
    out: *mut *mut c_char,
) -> UadomStatus {
    let Some(h) = h.as_ref() else {
        set_error("null algebra handle");
        return UadomStatus::NullPointer;
    };
    let ids_text = match read_str(identities_text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let sub = match need_sub(h) {
        Ok(s) => s,
        Err(s) => return s,
    };
    let ids = match parse_identities_file(ids_text, h.alg.sig()) {
        Ok(i) => i,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::ParseError;
        }
    };
    match dominion_upper(&h.alg, sub, &ids, max_c, &Budget::default()) {
        Ok(up) => {
            let v = json!({
                "members": up.members.iter().collect::<Vec<_>>(),
                "separated": up.witnesses.iter().map(|w| w.element).collect::<Vec<_>>(),
            });
            out_json(&v, out)
        }
        Err(e) => {
            set_error(e.to_string());
            UadomStatus::BudgetExceeded
        }
    }
}

/// The ∏-criterion on the witness model: bit i of `subset_mask` is variable
/// i+1. Writes 1 or 0 through `out`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uadom_model_transferable(
    n: usize,
    m: usize,
    subset_mask: u32,
    out: *mut i32,
) -> UadomStatus {
    if out.is_null() {
        set_error("null output pointer");
        return UadomStatus::NullPointer;
    }
    let inst = match ModelInstance::new(n, m) {
        Ok(i) => i,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::InvalidArgument;
        }
    };
    if u64::from(subset_mask) >= 1u64 << n {
        set_error("subset mask out of range");
        return UadomStatus::InvalidArgument;
    }
    *out = inst.transferable_subset(subset_mask) as i32;
    UadomStatus::Ok
}

/// BFS divisor-transfer equivalence of (u,v) and (u2,v2); each array holds
/// `n` exponents. Writes 1 or 0 through `out`.
///
/// # Safety
/// The four arrays must hold `n` readable u32 values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uadom_model_pair_equivalent(
    n: usize,
    m: usize,
    u: *const u32,
    v: *const u32,
    u2: *const u32,
    v2: *const u32,
    out: *mut i32,
) -> UadomStatus {
    if out.is_null() || u.is_null() || v.is_null() || u2.is_null() || v2.is_null() {
        set_error("null pointer argument");
        return UadomStatus::NullPointer;
    }
    let inst = match ModelInstance::new(n, m) {
        Ok(i) => i,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::InvalidArgument;
        }
    };
    let grab = |p: *const u32| FactoredInt::from_exps(std::slice::from_raw_parts(p, n).to_vec());
    match inst.pair_equivalent((&grab(u), &grab(v)), (&grab(u2), &grab(v2))) {
        Ok(b) => {
            *out = b as i32;
            UadomStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            UadomStatus::InvalidArgument
        }
    }
}

/// Transfer-system decision for a collection file over comma-separated
/// labels. JSON: verdict, witness when negative.
///
/// # Safety
/// All pointers must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn uadom_tsys_decide(
    labels_csv: *const c_char,
    collection_text: *const c_char,
    out: *mut *mut c_char,
) -> UadomStatus {
    let (labels, coll) = match (read_str(labels_csv), read_str(collection_text)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    let ground = match GroundSet::new(labels.split(',').map(str::trim)) {
        Ok(g) => g,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::InvalidArgument;
        }
    };
    let c = match parse_collection_file(coll, &ground) {
        Ok(c) => c,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::ParseError;
        }
    };
    let v = match is_transfer_system(&c) {
        TransferDecision::Yes(_) => json!({"verdict": "yes"}),
        TransferDecision::No { witness } => json!({
            "verdict": "no",
            "witness": ground.subset_to_string(witness),
        }),
    };
    out_json(&v, out)
}

/// The dominion witness for the principal system T(V); `v_mask` has bit i
/// for ground element i+1. JSON: instance data and the collection.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uadom_tsys_witness(
    n: usize,
    v_mask: u32,
    out: *mut *mut c_char,
) -> UadomStatus {
    let ground = match GroundSet::numeric(n) {
        Ok(g) => g,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::InvalidArgument;
        }
    };
    match dominion_witness(&ground, v_mask) {
        Ok(w) => {
            let v = json!({
                "m": w.instance.m(),
                "relabel": w.relabel,
                "collection": w.collection
                    .members()
                    .iter()
                    .map(|&m| ground.subset_to_string(m))
                    .collect::<Vec<_>>(),
            });
            out_json(&v, out)
        }
        Err(e) => {
            set_error(e.to_string());
            UadomStatus::InvalidArgument
        }
    }
}

/// Certify through a shared-variable array; block values come as arrays.
/// Validity of the array identity is recorded as an assumption. JSON: the
/// full certificate.
///
/// # Safety
/// Pointers must be valid; the three arrays must hold the stated lengths.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn uadom_certify_shared(
    h: *const UadomAlgebra,
    array_text: *const c_char,
    x1: *const usize,
    x1_len: usize,
    x2: *const usize,
    x2_len: usize,
    y: *const usize,
    y_len: usize,
    out: *mut *mut c_char,
) -> UadomStatus {
    let Some(h) = h.as_ref() else {
        set_error("null algebra handle");
        return UadomStatus::NullPointer;
    };
    let text = match read_str(array_text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let sub = match need_sub(h) {
        Ok(s) => s,
        Err(s) => return s,
    };
    let sh = match parse_array_file(text, h.alg.sig()) {
        Ok(ArrayFile::Shared(s)) => s,
        Ok(ArrayFile::Plain(_)) => {
            set_error("expected a shared array");
            return UadomStatus::InvalidArgument;
        }
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::ParseError;
        }
    };
    let grab = |p: *const usize, len: usize| {
        if p.is_null() && len > 0 {
            None
        } else if len == 0 {
            Some(Vec::new())
        } else {
            Some(std::slice::from_raw_parts(p, len).to_vec())
        }
    };
    let (Some(x1), Some(x2), Some(y)) = (grab(x1, x1_len), grab(x2, x2_len), grab(y, y_len)) else {
        set_error("null block pointer");
        return UadomStatus::NullPointer;
    };
    match certify_shared(&sh, &h.alg, sub, &x1, &x2, &y, ArrayValidity::Assumed) {
        Ok(cert) => out_json(&serde_json::to_value(&cert).expect("serializes"), out),
        Err(e) => {
            set_error(e.to_string());
            UadomStatus::InvalidArgument
        }
    }
}

/// Replay a certificate (JSON text) and search for separating pairs into
/// the handle's algebra. JSON: verdict.
///
/// # Safety
/// Pointers must be valid; `codomain` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uadom_verify_certificate(
    cert_json: *const c_char,
    codomain: *const UadomAlgebra,
    max_c: usize,
    out: *mut *mut c_char,
) -> UadomStatus {
    let text = match read_str(cert_json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let Some(codomain) = codomain.as_ref() else {
        set_error("null codomain handle");
        return UadomStatus::NullPointer;
    };
    let cert: uadom_core::arrays::Certificate = match serde_json::from_str(text) {
        Ok(c) => c,
        Err(e) => {
            set_error(e.to_string());
            return UadomStatus::ParseError;
        }
    };
    match verify_certificate(
        &cert,
        std::slice::from_ref(&codomain.alg),
        max_c,
        &Budget::default(),
    ) {
        Ok(Verification::Verified) => out_json(&json!({"verdict": "verified"}), out),
        Ok(Verification::Broken { step }) => {
            out_json(&json!({"verdict": "broken", "step": step}), out)
        }
        Ok(Verification::Separated { .. }) => out_json(&json!({"verdict": "separated"}), out),
        Err(e) => {
            set_error(e.to_string());
            UadomStatus::InvalidArgument
        }
    }
}
