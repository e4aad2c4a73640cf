//! C ABI over the getreason scoring primitives.
//!
//! Every fallible function returns a [`GrStatus`] and writes its result
//! through an out-pointer. On failure, [`gr_last_error`] returns a message
//! for the calling thread. Handles are opaque and must be released with
//! their matching `_free` function. Strings returned by the library must be
//! released with [`gr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use getreason::embedding::{EmbeddingProvider, StubEmbedder};
use getreason::gazetteer::{Gazetteer, GeoPoint};
use getreason::metrics::{
    event_score, geo_score, haversine_km, overall_score, score_card, temporal_score, GeoConfig,
    Profile, ScoringContext, TemporalConfig,
};
use getreason::schema::{
    parse_record, EventPrediction, GeoName, PredictionBundle, TemporalValue, ValueWithReasoning,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    NotFound = 4,
    Io = 5,
    ScoringFailed = 6,
    Panic = 7,
}

/// Weight profile for the overall score.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrProfile {
    Tara = 0,
    Wikitilo = 1,
}

impl From<GrProfile> for Profile {
    fn from(p: GrProfile) -> Self {
        match p {
            GrProfile::Tara => Profile::Tara,
            GrProfile::Wikitilo => Profile::Wikitilo,
        }
    }
}

/// Marks an absent temporal unit.
pub const GR_UNIT_ABSENT: i32 = i32::MIN;

/// Temporal value; decades are start years, centuries ordinals.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GrTemporal {
    pub century: i32,
    pub decade: i32,
    pub year: i32,
    pub month: i32,
    pub day: i32,
}

impl From<GrTemporal> for TemporalValue {
    fn from(t: GrTemporal) -> Self {
        let u = |v: i32| (v != GR_UNIT_ABSENT).then_some(v);
        TemporalValue {
            century: u(t.century),
            decade: u(t.decade),
            year: u(t.year),
            month: u(t.month),
            day: u(t.day),
        }
    }
}

/// Opaque gazetteer handle.
pub struct GrGazetteer(Gazetteer);

/// Opaque embedding provider handle.
pub struct GrEmbedder(Box<dyn EmbeddingProvider>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(GrStatus, String);

impl Failure {
    fn new(status: GrStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GrStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (GrStatus::Ok, None),
        Ok(Err(Failure(s, m))) => (s, Some(m)),
        Err(_) => (GrStatus::Panic, Some("internal panic".to_string())),
    };
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = msg.map(|m| CString::new(m.replace('\0', " ")).expect("no interior nul"));
    });
    status
}

unsafe fn ref_of<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(GrStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_of<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(GrStatus::NullPointer, format!("{what} is null")))
}

/// Null reads as absent.
unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| Failure::new(GrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    opt_str(p, what)?.ok_or_else(|| Failure::new(GrStatus::NullPointer, format!("{what} is null")))
}

unsafe fn geo_name(
    country: *const c_char,
    state: *const c_char,
    city: *const c_char,
) -> Result<GeoName, Failure> {
    Ok(GeoName::new(
        opt_str(country, "country")?,
        opt_str(state, "state")?,
        opt_str(city, "city")?,
    ))
}

fn point(lat: f64, lon: f64) -> Result<GeoPoint, Failure> {
    GeoPoint::new(lat, lon).map_err(|e| Failure::new(GrStatus::InvalidArgument, e.to_string()))
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library; valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The gazetteer compiled into the library.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gr_gazetteer_bundled(out: *mut *mut GrGazetteer) -> GrStatus {
    guard(|| {
        *out_of(out, "out")? = Box::into_raw(Box::new(GrGazetteer(Gazetteer::bundled())));
        Ok(())
    })
}

/// Loads a gazetteer CSV (country,state_or_province,city,lat,lon).
///
/// # Safety
/// `path` must be a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gr_gazetteer_open(
    path: *const c_char,
    out: *mut *mut GrGazetteer,
) -> GrStatus {
    guard(|| {
        let out = out_of(out, "out")?;
        let path = req_str(path, "path")?;
        let gz = Gazetteer::from_path(Path::new(path))
            .map_err(|e| Failure::new(GrStatus::Io, e.to_string()))?;
        *out = Box::into_raw(Box::new(GrGazetteer(gz)));
        Ok(())
    })
}

/// # Safety
/// `gz` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gr_gazetteer_free(gz: *mut GrGazetteer) {
    if !gz.is_null() {
        drop(Box::from_raw(gz));
    }
}

/// Number of rows.
///
/// # Safety
/// `gz` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gr_gazetteer_len(gz: *const GrGazetteer, out: *mut usize) -> GrStatus {
    guard(|| {
        *out_of(out, "out")? = ref_of(gz, "gazetteer")?.0.len();
        Ok(())
    })
}

/// Coordinates for a place name. Null name parts are absent. Returns
/// `NotFound` when the name does not resolve.
///
/// # Safety
/// `gz` must be a live handle; strings null or nul-terminated; outs valid.
#[no_mangle]
pub unsafe extern "C" fn gr_gazetteer_resolve(
    gz: *const GrGazetteer,
    country: *const c_char,
    state: *const c_char,
    city: *const c_char,
    out_lat: *mut f64,
    out_lon: *mut f64,
) -> GrStatus {
    guard(|| {
        let gz = ref_of(gz, "gazetteer")?;
        let (lat, lon) = (out_of(out_lat, "out_lat")?, out_of(out_lon, "out_lon")?);
        let name = geo_name(country, state, city)?;
        let p =
            gz.0.resolve(&name)
                .ok_or_else(|| Failure::new(GrStatus::NotFound, "place not in gazetteer"))?;
        *lat = p.lat_deg;
        *lon = p.lon_deg;
        Ok(())
    })
}

/// Great-circle distance in km on a sphere of radius 6371 km.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gr_haversine_km(
    lat1: f64,
    lon1: f64,
    lat2: f64,
    lon2: f64,
    out: *mut f64,
) -> GrStatus {
    guard(|| {
        let out = out_of(out, "out")?;
        *out = haversine_km(
            point(lat1, lon1)?,
            point(lat2, lon2)?,
            &GeoConfig::default(),
        );
        Ok(())
    })
}

/// Geospatial score of a predicted place against the ground truth.
///
/// # Safety
/// `gz` must be a live handle; strings null or nul-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gr_geo_score(
    gz: *const GrGazetteer,
    pred_country: *const c_char,
    pred_state: *const c_char,
    pred_city: *const c_char,
    gt_country: *const c_char,
    gt_state: *const c_char,
    gt_city: *const c_char,
    out: *mut f64,
) -> GrStatus {
    guard(|| {
        let gz = ref_of(gz, "gazetteer")?;
        let out = out_of(out, "out")?;
        let pred = geo_name(pred_country, pred_state, pred_city)?;
        let gt = geo_name(gt_country, gt_state, gt_city)?;
        *out = geo_score(&pred, &gt, &gz.0, &GeoConfig::default()).score;
        Ok(())
    })
}

/// Temporal score with the default tolerances and weights. Fails with
/// `InvalidArgument` when the ground truth has no units.
///
/// # Safety
/// `pred`, `gt` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gr_temporal_score(
    pred: *const GrTemporal,
    gt: *const GrTemporal,
    out: *mut f64,
) -> GrStatus {
    guard(|| {
        let pred: TemporalValue = (*ref_of(pred, "pred")?).into();
        let gt: TemporalValue = (*ref_of(gt, "gt")?).into();
        let out = out_of(out, "out")?;
        *out = temporal_score(&pred, &gt, &TemporalConfig::default())
            .map_err(|e| Failure::new(GrStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Offline bag-of-tokens embedder.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gr_stub_embedder_new(dim: usize, out: *mut *mut GrEmbedder) -> GrStatus {
    guard(|| {
        let out = out_of(out, "out")?;
        if dim == 0 {
            return Err(Failure::new(
                GrStatus::InvalidArgument,
                "dim must be positive",
            ));
        }
        *out = Box::into_raw(Box::new(GrEmbedder(Box::new(StubEmbedder::with_dim(dim)))));
        Ok(())
    })
}

/// # Safety
/// `e` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gr_embedder_free(e: *mut GrEmbedder) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Event score of a predicted event/background pair against the ground truth.
///
/// # Safety
/// `e` must be a live handle; strings null or nul-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gr_event_score(
    e: *const GrEmbedder,
    pred_event: *const c_char,
    pred_background: *const c_char,
    gt_event: *const c_char,
    gt_background: *const c_char,
    out: *mut f64,
) -> GrStatus {
    guard(|| {
        let e = ref_of(e, "embedder")?;
        let out = out_of(out, "out")?;
        let v = |s: Option<&str>| ValueWithReasoning {
            value: s.unwrap_or("").into(),
            reasoning: String::new(),
        };
        let pred = EventPrediction {
            event: v(opt_str(pred_event, "pred_event")?),
            background: v(opt_str(pred_background, "pred_background")?),
        };
        let gte = opt_str(gt_event, "gt_event")?.unwrap_or("");
        let gtb = opt_str(gt_background, "gt_background")?.unwrap_or("");
        *out = event_score(&pred, gte, gtb, e.0.as_ref())
            .map_err(|err| Failure::new(GrStatus::ScoringFailed, err.to_string()))?;
        Ok(())
    })
}

/// Profile-weighted overall score. `has_event` must be true exactly for
/// profiles that weight the event score.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gr_overall_score(
    event: f64,
    has_event: bool,
    geo: f64,
    temporal: f64,
    profile: GrProfile,
    out: *mut f64,
) -> GrStatus {
    guard(|| {
        let out = out_of(out, "out")?;
        let es = has_event.then_some(event);
        *out = overall_score(es, geo, temporal, &Profile::from(profile).weights())
            .map_err(|e| Failure::new(GrStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Scores one prediction against one dataset record and returns the score
/// card as JSON. `record_json` is a dataset line; `prediction_json` is the
/// `prediction` object of a predictions line. Free the result with
/// [`gr_string_free`].
///
/// # Safety
/// Handles must be live; strings nul-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gr_score_json(
    gz: *const GrGazetteer,
    e: *const GrEmbedder,
    profile: GrProfile,
    record_json: *const c_char,
    prediction_json: *const c_char,
    out: *mut *mut c_char,
) -> GrStatus {
    guard(|| {
        let gz = ref_of(gz, "gazetteer")?;
        let e = ref_of(e, "embedder")?;
        let out = out_of(out, "out")?;
        let bad = |m: String| Failure::new(GrStatus::InvalidArgument, m);
        let record = parse_record(req_str(record_json, "record_json")?, Path::new("."))
            .map_err(|err| bad(format!("record: {err}")))?
            .record;
        let gt = record
            .ground_truth
            .as_ref()
            .ok_or_else(|| bad("record has no ground truth".into()))?;
        let pred: PredictionBundle =
            serde_json::from_str(req_str(prediction_json, "prediction_json")?)
                .map_err(|err| bad(format!("prediction: {err}")))?;
        let profile = Profile::from(profile);
        let ctx = ScoringContext {
            gazetteer: &gz.0,
            embedder: e.0.as_ref(),
            geo: GeoConfig::default(),
            temporal: TemporalConfig::default(),
            profile: profile.weights(),
        };
        let card = score_card(&record.id, &pred, gt, &ctx)
            .map_err(|err| Failure::new(GrStatus::ScoringFailed, err.to_string()))?;
        let text = serde_json::to_string(&card)
            .map_err(|err| Failure::new(GrStatus::ScoringFailed, err.to_string()))?;
        *out = CString::new(text).expect("json has no nul").into_raw();
        Ok(())
    })
}
