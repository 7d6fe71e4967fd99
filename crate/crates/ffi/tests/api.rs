use std::ffi::{CStr, CString};
use std::ptr;

use fiberwalk_ffi::*;

const TRIANGLE: &str = r#"{"d": 2, "offsets": [["0", "0"]],
    "halfspaces": [{"a": [-1, 0], "b": "0"}, {"a": [0, -1], "b": "0"}, {"a": [1, 1], "b": "1"}],
    "witness": ["1/4", "1/4"]}"#;

fn instance(json: &str) -> *mut FwInstance {
    let text = CString::new(json).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(
        unsafe { fw_instance_from_json(text.as_ptr(), &mut inst) },
        FwStatus::Ok
    );
    inst
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { fw_string_free(p) };
    s
}

fn last_error() -> String {
    let p = fw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn triangle_sampler(m: u64, seed: u64) -> (*mut FwInstance, *mut FwSampler) {
    let inst = instance(TRIANGLE);
    let mut s = ptr::null_mut();
    let st = unsafe {
        fw_sampler_build(
            inst,
            FwStrategy::Complete,
            ptr::null(),
            0,
            m,
            seed,
            0.0,
            &mut s,
        )
    };
    assert_eq!(st, FwStatus::Ok);
    (inst, s)
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(fw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn build_info_and_sample() {
    let (inst, s) = triangle_sampler(4, 7);
    let mut info = FwSamplerInfo::default();
    assert_eq!(unsafe { fw_sampler_info(s, &mut info) }, FwStatus::Ok);
    assert_eq!(
        (info.dim, info.n_h, info.n_e, info.num_vertices, info.degree),
        (2, 15, 16, 240, 196)
    );
    assert!(info.lambda_e <= info.lambda_target);

    let mut steps = 0;
    assert_eq!(
        unsafe { fw_sampler_auto_steps(s, &mut steps) },
        FwStatus::Ok
    );
    let mut buf = vec![f64::NAN; 40];
    let st =
        unsafe { fw_sampler_sample(s, 20, steps, 3, 10_000, false, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(st, FwStatus::Ok);
    for p in buf.chunks(2) {
        assert!(p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 4.0);
        assert_eq!(p[0].fract(), 0.0);
    }

    let mut csv = ptr::null_mut();
    assert_eq!(
        unsafe { fw_sampler_sample_csv(s, 20, steps, 3, 10_000, false, &mut csv) },
        FwStatus::Ok
    );
    let csv = take_string(csv);
    let from_csv: Vec<f64> = csv
        .lines()
        .flat_map(|l| l.split(','))
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(from_csv, buf);

    let mut frac = ptr::null_mut();
    assert_eq!(
        unsafe { fw_sampler_irrelevant_fraction(s, &mut frac) },
        FwStatus::Ok
    );
    assert_eq!(take_string(frac), "15/16");

    unsafe {
        fw_sampler_free(s);
        fw_instance_free(inst);
    }
}

#[test]
fn decode_and_relevance() {
    let (inst, s) = triangle_sampler(2, 1);
    let mut relevant = 0;
    for v in 0..60 {
        let mut p = ptr::null_mut();
        assert_eq!(unsafe { fw_sampler_decode(s, v, &mut p) }, FwStatus::Ok);
        let coords: Vec<i64> = take_string(p)
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        let mut r = false;
        assert_eq!(
            unsafe { fw_sampler_is_relevant(s, v, &mut r) },
            FwStatus::Ok
        );
        assert_eq!(
            r,
            coords[0] >= 0 && coords[1] >= 0 && coords[0] + coords[1] <= 2
        );
        relevant += usize::from(r);
    }
    assert_eq!(relevant, 6);
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { fw_sampler_decode(s, 60, &mut p) },
        FwStatus::InvalidArgument
    );
    assert!(p.is_null());
    unsafe {
        fw_sampler_free(s);
        fw_instance_free(inst);
    }
}

#[test]
fn moves_strategy_and_bundle_roundtrip() {
    let inst = instance(TRIANGLE);
    let moves = [1i64, 0, 0, 1];
    let mut s = ptr::null_mut();
    let st = unsafe {
        fw_sampler_build(
            inst,
            FwStrategy::MovesSquared,
            moves.as_ptr(),
            2,
            3,
            5,
            0.95,
            &mut s,
        )
    };
    assert_eq!(st, FwStatus::Ok, "{}", last_error());
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fw_sampler_save(s, path.as_ptr()) }, FwStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { fw_sampler_load(path.as_ptr(), &mut back) },
        FwStatus::Ok
    );
    let (mut a, mut b) = (FwSamplerInfo::default(), FwSamplerInfo::default());
    unsafe {
        fw_sampler_info(s, &mut a);
        fw_sampler_info(back, &mut b);
    }
    assert_eq!(a, b);
    let (mut x, mut y) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        fw_sampler_sample_csv(s, 10, 12, 9, 10_000, false, &mut x);
        fw_sampler_sample_csv(back, 10, 12, 9, 10_000, false, &mut y);
    }
    assert_eq!(take_string(x), take_string(y));
    unsafe {
        fw_sampler_free(s);
        fw_sampler_free(back);
        fw_instance_free(inst);
    }
}

#[test]
fn error_codes() {
    let bad = CString::new("{").unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(
        unsafe { fw_instance_from_json(bad.as_ptr(), &mut inst) },
        FwStatus::InvalidArgument
    );
    assert!(inst.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { fw_instance_from_json(ptr::null(), &mut inst) },
        FwStatus::NullPointer
    );
    let mut dim = 0;
    assert_eq!(
        unsafe { fw_instance_dim(ptr::null(), &mut dim) },
        FwStatus::NullPointer
    );

    let bytes = b"\xff\0";
    assert_eq!(
        unsafe { fw_instance_from_json(bytes.as_ptr().cast(), &mut inst) },
        FwStatus::InvalidUtf8
    );

    // An infeasible target cannot be certified.
    let tri = instance(TRIANGLE);
    let mut s = ptr::null_mut();
    let st = unsafe {
        fw_sampler_build(
            tri,
            FwStrategy::Complete,
            ptr::null(),
            0,
            2,
            1,
            1e-6,
            &mut s,
        )
    };
    assert_eq!(st, FwStatus::CertificationFailed);
    assert!(s.is_null());

    // Moves of length two leave the base graph disconnected.
    let wide = [2i64, 0, 0, 2];
    let st =
        unsafe { fw_sampler_build(tri, FwStrategy::Moves, wide.as_ptr(), 2, 2, 1, 0.0, &mut s) };
    assert_eq!(st, FwStatus::Infeasible);
    assert!(last_error().contains("disconnected"), "{}", last_error());

    let (i2, s2) = triangle_sampler(2, 1);
    let mut buf = [0.0; 3];
    let st = unsafe { fw_sampler_sample(s2, 2, 4, 1, 10, false, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(st, FwStatus::BufferTooSmall);
    // A success clears the message.
    let mut dim = 0;
    assert_eq!(unsafe { fw_instance_dim(i2, &mut dim) }, FwStatus::Ok);
    assert!(fw_last_error_message().is_null());
    unsafe {
        fw_sampler_free(s2);
        fw_instance_free(i2);
        fw_instance_free(tri);
    }
}
