use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use getreason_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = gr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn bundled() -> *mut GrGazetteer {
    let mut gz = ptr::null_mut();
    assert_eq!(unsafe { gr_gazetteer_bundled(&mut gz) }, GrStatus::Ok);
    gz
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(gr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn haversine_and_bad_coordinates() {
    let mut d = 0.0;
    assert_eq!(
        unsafe { gr_haversine_km(0.0, 0.0, 0.0, 180.0, &mut d) },
        GrStatus::Ok
    );
    assert!((d - 20015.09).abs() < 0.01);
    assert!(gr_last_error().is_null());
    assert_eq!(
        unsafe { gr_haversine_km(95.0, 0.0, 0.0, 0.0, &mut d) },
        GrStatus::InvalidArgument
    );
    assert!(last_error().contains("95"), "{}", last_error());
    assert_eq!(
        unsafe { gr_haversine_km(0.0, 0.0, 0.0, 0.0, ptr::null_mut()) },
        GrStatus::NullPointer
    );
}

#[test]
fn gazetteer_lifecycle_and_lookup() {
    let gz = bundled();
    let mut n = 0usize;
    assert_eq!(unsafe { gr_gazetteer_len(gz, &mut n) }, GrStatus::Ok);
    assert!(n > 20);
    let (mut lat, mut lon) = (0.0, 0.0);
    let (id, jk) = (c("Indonesia"), c("Jakarta"));
    assert_eq!(
        unsafe {
            gr_gazetteer_resolve(
                gz,
                id.as_ptr(),
                ptr::null(),
                jk.as_ptr(),
                &mut lat,
                &mut lon,
            )
        },
        GrStatus::Ok
    );
    assert!((lat + 6.2088).abs() < 1e-9 && (lon - 106.8456).abs() < 1e-9);
    let atl = c("Atlantis");
    let s = unsafe {
        gr_gazetteer_resolve(
            gz,
            atl.as_ptr(),
            ptr::null(),
            ptr::null(),
            &mut lat,
            &mut lon,
        )
    };
    assert_eq!(s, GrStatus::NotFound);
    unsafe { gr_gazetteer_free(gz) };
    unsafe { gr_gazetteer_free(ptr::null_mut()) };
}

#[test]
fn gazetteer_open_from_file_and_missing() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.csv");
    std::fs::write(
        &p,
        "country,state_or_province,city,lat,lon\nA,,,0,0\nB,,,0,1\n",
    )
    .unwrap();
    let mut gz = ptr::null_mut();
    let path = c(p.to_str().unwrap());
    assert_eq!(
        unsafe { gr_gazetteer_open(path.as_ptr(), &mut gz) },
        GrStatus::Ok
    );
    let mut n = 0usize;
    unsafe { gr_gazetteer_len(gz, &mut n) };
    assert_eq!(n, 2);
    unsafe { gr_gazetteer_free(gz) };
    let missing = c("/nonexistent/g.csv");
    assert_eq!(
        unsafe { gr_gazetteer_open(missing.as_ptr(), &mut gz) },
        GrStatus::Io
    );
    assert_eq!(
        unsafe { gr_gazetteer_open(ptr::null(), &mut gz) },
        GrStatus::NullPointer
    );
}

#[test]
fn geo_score_defaults() {
    let gz = bundled();
    let mut s = -1.0;
    let (uk, ldn) = (c("United Kingdom"), c("London"));
    let st = unsafe {
        gr_geo_score(
            gz,
            uk.as_ptr(),
            ptr::null(),
            ldn.as_ptr(),
            uk.as_ptr(),
            ptr::null(),
            ldn.as_ptr(),
            &mut s,
        )
    };
    assert_eq!((st, s), (GrStatus::Ok, 1.0));
    let n = ptr::null();
    unsafe { gr_geo_score(gz, uk.as_ptr(), n, n, n, n, n, &mut s) };
    assert_eq!(s, 1.0, "absent ground truth");
    unsafe { gr_geo_score(gz, n, n, n, uk.as_ptr(), n, n, &mut s) };
    assert_eq!(s, 0.0, "absent prediction");
    let bad = [0xffu8, 0];
    let st = unsafe { gr_geo_score(gz, bad.as_ptr().cast(), n, n, uk.as_ptr(), n, n, &mut s) };
    assert_eq!(st, GrStatus::InvalidUtf8);
    unsafe { gr_gazetteer_free(gz) };
}

#[test]
fn temporal_score_worked_case() {
    let gt = GrTemporal {
        century: 21,
        decade: 2010,
        year: 2019,
        month: 10,
        day: 20,
    };
    let pred = GrTemporal {
        year: GR_UNIT_ABSENT,
        ..gt
    };
    let mut s = 0.0;
    assert_eq!(
        unsafe { gr_temporal_score(&pred, &gt, &mut s) },
        GrStatus::Ok
    );
    assert!((s - 0.8).abs() < 1e-12);
    let empty = GrTemporal {
        century: GR_UNIT_ABSENT,
        decade: GR_UNIT_ABSENT,
        year: GR_UNIT_ABSENT,
        month: GR_UNIT_ABSENT,
        day: GR_UNIT_ABSENT,
    };
    assert_eq!(
        unsafe { gr_temporal_score(&pred, &empty, &mut s) },
        GrStatus::InvalidArgument
    );
}

#[test]
fn event_and_overall() {
    let mut e = ptr::null_mut();
    assert_eq!(
        unsafe { gr_stub_embedder_new(0, &mut e) },
        GrStatus::InvalidArgument
    );
    assert_eq!(unsafe { gr_stub_embedder_new(256, &mut e) }, GrStatus::Ok);
    let (a, b) = (c("Presidential inauguration"), c("Second term begins"));
    let mut s = 0.0;
    assert_eq!(
        unsafe { gr_event_score(e, a.as_ptr(), b.as_ptr(), a.as_ptr(), b.as_ptr(), &mut s) },
        GrStatus::Ok
    );
    assert!((s - 1.0).abs() < 1e-12);
    unsafe { gr_embedder_free(e) };

    let mut o = 0.0;
    assert_eq!(
        unsafe { gr_overall_score(0.703, true, 0.694, 0.381, GrProfile::Tara, &mut o) },
        GrStatus::Ok
    );
    assert!((o * 100.0 - 60.4).abs() < 0.1);
    assert_eq!(
        unsafe { gr_overall_score(0.0, false, 0.424, 0.34, GrProfile::Wikitilo, &mut o) },
        GrStatus::Ok
    );
    assert!((o - 0.382).abs() < 1e-12);
    let st = unsafe { gr_overall_score(0.5, true, 0.424, 0.34, GrProfile::Wikitilo, &mut o) };
    assert_eq!(st, GrStatus::InvalidArgument);
}

#[test]
fn score_json_matches_golden() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/inauguration");
    let record = std::fs::read_to_string(root.join("dataset.jsonl")).unwrap();
    let golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("golden_scorecard.json")).unwrap())
            .unwrap();
    let prediction = serde_json::json!({
        "event": {
            "event": {"value": "Presidential Inauguration", "reasoning": ""},
            "background": {"value": "Joko Widodo's second term presidential inauguration in Indonesia.", "reasoning": ""}
        },
        "temporal": {"value": {"century": 21, "decade": 2010, "year": 2019, "month": 10, "day": 20}, "time_of_day": null, "reasoning": ""},
        "geo": {"value": {"country": "Indonesia", "state_or_province": null, "city": "Jakarta"}, "reasoning": ""}
    });
    let gz = bundled();
    let mut e = ptr::null_mut();
    unsafe { gr_stub_embedder_new(256, &mut e) };
    let (rec, pred) = (c(record.trim()), c(&prediction.to_string()));
    let mut out = ptr::null_mut();
    let st = unsafe {
        gr_score_json(
            gz,
            e,
            GrProfile::Tara,
            rec.as_ptr(),
            pred.as_ptr(),
            &mut out,
        )
    };
    assert_eq!(st, GrStatus::Ok, "{}", last_error());
    let card: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    unsafe { gr_string_free(out) };
    for k in ["event_score", "geo_score", "temporal_score", "overall"] {
        let (a, b) = (card[k].as_f64().unwrap(), golden[k].as_f64().unwrap());
        assert!((a - b).abs() < 1e-12, "{k}: {a} vs {b}");
    }
    let junk = c("{");
    let st = unsafe {
        gr_score_json(
            gz,
            e,
            GrProfile::Tara,
            rec.as_ptr(),
            junk.as_ptr(),
            &mut out,
        )
    };
    assert_eq!(st, GrStatus::InvalidArgument);
    assert!(last_error().starts_with("prediction"));
    unsafe {
        gr_embedder_free(e);
        gr_gazetteer_free(gz);
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"getreason.h\"\n\
         int main(void) {\n\
           GrGazetteer *gz = 0; double d = 0; size_t n = 0;\n\
           GrTemporal t = { 21, 2010, GR_UNIT_ABSENT, 10, 20 };\n\
           if (gr_gazetteer_bundled(&gz) != GR_STATUS_OK) return 1;\n\
           (void)gr_gazetteer_len(gz, &n); gr_gazetteer_free(gz);\n\
           (void)gr_temporal_score(&t, &t, &d);\n\
           return gr_haversine_km(0, 0, 0, 180, &d) == GR_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    for (compiler, extra) in [
        ("cc", vec!["-x", "c", "-std=c99"]),
        ("c++", vec!["-x", "c++"]),
    ] {
        let out = Command::new(compiler)
            .args(&extra)
            .args(["-Wall", "-Werror", "-fsyntax-only", "-I"])
            .arg(dir.join("include"))
            .arg(&src)
            .output()
            .unwrap_or_else(|e| panic!("{compiler}: {e}"));
        assert!(
            out.status.success(),
            "{compiler}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
