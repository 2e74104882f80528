//! C ABI over the pathboost engine.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns a [`PbStatus`] and
//! leaves a message for [`pb_last_error`] on failure. Status values 2, 3 and 4
//! match the command-line exit codes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pathboost::{AnchorConfig, AttributeMode, BoostConfig, BoostModel, Dataset, Error, LoadOptions, Task};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbStatus {
    Ok = 0,
    /// Input data could not be read or is malformed.
    Data = 2,
    /// A model file or string is unusable.
    Model = 3,
    /// Bad configuration or training setup.
    Config = 4,
    /// Null pointer, invalid UTF-8 or a buffer of the wrong size.
    InvalidArgument = 5,
    /// The engine panicked. This is a bug.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbTask {
    Classification = 0,
    Regression = 1,
}

/// Training parameters. Start from [`pb_train_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PbTrainParams {
    pub task: PbTask,
    pub m_stop: usize,
    pub eta: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// In edges.
    pub max_path_length: usize,
    /// Counts only instead of counts plus averaged attributes.
    pub restricted: bool,
    pub seed: u64,
}

/// A loaded dataset.
pub struct PbDataset(Dataset);

/// A trained model.
pub struct PbModel(BoostModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PbStatus {
    match e.exit_code() {
        2 => PbStatus::Data,
        3 => PbStatus::Model,
        _ => PbStatus::Config,
    }
}

struct Fail(PbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(PbStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PbStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error: engine panicked".into());
            PbStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} is null")))
}

fn task_of(t: PbTask) -> Task {
    match t {
        PbTask::Classification => Task::Classification,
        PbTask::Regression => Task::Regression,
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn pb_train_params_default() -> PbTrainParams {
    let d = BoostConfig::default();
    PbTrainParams {
        task: PbTask::Classification,
        m_stop: d.m_stop,
        eta: d.eta,
        max_depth: d.max_depth,
        min_leaf: d.min_leaf,
        max_path_length: d.max_path_length,
        restricted: false,
        seed: d.seed,
    }
}

/// Load a TUDataset directory. `name` may be null to use the directory name.
/// `target_index` picks the `_graph_attributes` column for regression.
///
/// # Safety
/// `dir` and `name` must be null or NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_load(
    dir: *const c_char,
    name: *const c_char,
    task: PbTask,
    target_index: usize,
    out: *mut *mut PbDataset,
) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let dir = Path::new(str_arg(dir, "dir")?);
        let name = if name.is_null() {
            dir.file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| invalid("cannot infer dataset name from dir"))?
                .to_string()
        } else {
            str_arg(name, "name")?.to_string()
        };
        let options = LoadOptions { task: task_of(task), target_index };
        let (ds, _) = pathboost::load_dataset(dir, &name, options)?;
        *out = Box::into_raw(Box::new(PbDataset(ds)));
        Ok(())
    })
}

/// Number of graphs, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_len(ds: *const PbDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// Copy the targets into `out`, which must hold `len == pb_dataset_len` values.
///
/// # Safety
/// `ds` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_targets(ds: *const PbDataset, out: *mut f64, len: usize) -> PbStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let targets = ds.0.targets();
        if out.is_null() || len != targets.len() {
            return Err(invalid(&format!("output buffer must hold {} values", targets.len())));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(targets);
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_free(ds: *mut PbDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Train with automatic anchor selection.
///
/// # Safety
/// `ds` must be a live handle, `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_model_train(
    ds: *const PbDataset,
    params: *const PbTrainParams,
    out: *mut *mut PbModel,
) -> PbStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let p = ref_arg(params, "params")?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let cfg = BoostConfig {
            m_stop: p.m_stop,
            eta: p.eta,
            task: task_of(p.task),
            max_depth: p.max_depth,
            min_leaf: p.min_leaf,
            attribute_mode: if p.restricted { AttributeMode::Restricted } else { AttributeMode::Complete },
            max_path_length: p.max_path_length,
            seed: p.seed,
        };
        let model = pathboost::train(&ds.0, &cfg, &AnchorConfig::default())?;
        *out = Box::into_raw(Box::new(PbModel(model)));
        Ok(())
    })
}

/// Raw scores for every graph of `ds`: logits for classification, values for
/// regression. `out` must hold `len == pb_dataset_len(ds)` values.
///
/// # Safety
/// Handles must be live and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pb_model_predict(
    model: *const PbModel,
    ds: *const PbDataset,
    out: *mut f64,
    len: usize,
) -> PbStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let ds = ref_arg(ds, "dataset")?;
        if out.is_null() || len != ds.0.len() {
            return Err(invalid(&format!("output buffer must hold {} values", ds.0.len())));
        }
        let scores = model.0.predict_scores(&ds.0)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&scores);
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_model_task(model: *const PbModel) -> PbTask {
    match model.as_ref().map(|m| m.0.task) {
        Some(Task::Regression) => PbTask::Regression,
        _ => PbTask::Classification,
    }
}

/// Number of boosting stages, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_model_stage_count(model: *const PbModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.stages.len())
}

/// Serialize to JSON. Release the string with [`pb_string_free`]. Returns
/// null for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_model_to_json(model: *const PbModel) -> *mut c_char {
    match model.as_ref() {
        Some(m) => CString::new(m.0.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => {
            set_error("model is null".into());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_model_from_json(json: *const c_char, out: *mut *mut PbModel) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let model = BoostModel::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(PbModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pb_model_save(model: *const PbModel, path: *const c_char) -> PbStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let path = str_arg(path, "path")?;
        std::fs::write(path, model.0.to_json()).map_err(|e| Fail(PbStatus::Data, format!("{path}: {e}")))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_model_load(path: *const c_char, out: *mut *mut PbModel) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let path = str_arg(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(|e| Fail(PbStatus::Data, format!("{path}: {e}")))?;
        let model = BoostModel::from_json(&text).map_err(|e| e.with_context(path))?;
        *out = Box::into_raw(Box::new(PbModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn pb_model_free(model: *mut PbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn pb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
