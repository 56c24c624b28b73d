use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use nrm_ffi::*;

fn compile(formula: &str) -> (NrmStatus, *mut NrmMachine) {
    let f = CString::new(formula).unwrap();
    let a = CString::new("a,b,c,d,e").unwrap();
    let mut m = ptr::null_mut();
    let status = unsafe { nrm_machine_compile(f.as_ptr(), a.as_ptr(), &mut m) };
    (status, m)
}

fn last_error() -> String {
    let p = nrm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn compile_run_and_free() {
    let (status, m) = compile("F(a) & F(b)");
    assert_eq!(status, NrmStatus::Ok);
    assert!(nrm_last_error().is_null());
    unsafe {
        assert_eq!(nrm_machine_num_symbols(m), 5);
        assert_eq!(nrm_machine_num_states(m), 4);
        // e, a, e, b: levels climb to the accepting state.
        let x = [4usize, 0, 4, 1];
        let mut labels = [0i64; 4];
        assert_eq!(nrm_machine_run(m, x.as_ptr(), 4, labels.as_mut_ptr()), NrmStatus::Ok);
        assert!(labels[0] < labels[1] && labels[1] == labels[2] && labels[2] < labels[3]);

        let bad = [9usize];
        assert_eq!(nrm_machine_run(m, bad.as_ptr(), 1, labels.as_mut_ptr()), NrmStatus::InvalidInput);
        assert!(last_error().contains("out of range"));
        nrm_machine_free(m);
    }
}

#[test]
fn dot_and_text_round_trip() {
    let (_, m) = compile("F(a)");
    unsafe {
        let mut dot = ptr::null_mut();
        assert_eq!(nrm_machine_to_dot(m, &mut dot), NrmStatus::Ok);
        assert!(CStr::from_ptr(dot).to_str().unwrap().starts_with("digraph"));
        nrm_string_free(dot);

        let mut text = ptr::null_mut();
        assert_eq!(nrm_machine_serialize(m, &mut text), NrmStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(nrm_machine_parse(text, &mut back), NrmStatus::Ok);
        assert_eq!(nrm_machine_num_states(back), nrm_machine_num_states(m));
        nrm_string_free(text);
        nrm_machine_free(back);
        nrm_machine_free(m);
    }
}

#[test]
fn urs_count_and_images() {
    let (_, m) = compile("F(a) & F(b)");
    unsafe {
        let mut count = 0;
        assert_eq!(nrm_urs_find(m, ptr::null_mut(), 0, &mut count), NrmStatus::Ok);
        assert_eq!(count, 54);
        let mut images = vec![usize::MAX; count * 5];
        assert_eq!(nrm_urs_find(m, images.as_mut_ptr(), count, &mut count), NrmStatus::Ok);
        assert!(images.iter().all(|&s| s < 5));
        assert!(images.chunks(5).any(|r| r == [0, 1, 2, 3, 4]));
        assert!(images.chunks(5).any(|r| r[0] == 1 && r[1] == 0));
        nrm_machine_free(m);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let (status, m) = compile("F(");
    assert_eq!(status, NrmStatus::ParseError);
    assert!(m.is_null());
    assert!(last_error().contains("syntax"));

    let (status, _) = compile("F(z)");
    assert_eq!(status, NrmStatus::InvalidInput);
    assert!(last_error().contains('z'));

    unsafe {
        assert_eq!(nrm_machine_compile(ptr::null(), ptr::null(), ptr::null_mut()), NrmStatus::NullPointer);
        let bytes = [0xffu8, 0];
        let a = CString::new("a").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(nrm_machine_compile(bytes.as_ptr().cast(), a.as_ptr(), &mut out), NrmStatus::InvalidUtf8);
        let path = CString::new("/nonexistent/grounder.ckpt").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(nrm_grounder_load(path.as_ptr(), &mut g), NrmStatus::IoError);
        assert_eq!(nrm_machine_num_states(ptr::null()), 0);
        nrm_machine_free(ptr::null_mut());
        nrm_string_free(ptr::null_mut());
        nrm_grounder_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export_and_parses_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/nrm_ffi.h")).unwrap();
    for name in [
        "nrm_last_error",
        "nrm_machine_compile",
        "nrm_machine_parse",
        "nrm_machine_free",
        "nrm_machine_run",
        "nrm_machine_to_dot",
        "nrm_urs_find",
        "nrm_grounder_load",
        "nrm_grounder_predict",
        "NRM_STATUS_PANIC",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    // Syntax check with whatever C compiler is around; skipped without one.
    if let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c"])
        .arg(dir.join("include/nrm_ffi.h"))
        .output()
    {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn grounder_checkpoint_predicts_like_the_library() {
    use nrm_core::diff::Tensor;
    use nrm_core::nrm::Grounder;
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let g = Grounder::new(2, 5, 8, 0.0, &mut rng);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.ckpt");
    g.write_to(&mut std::fs::File::create(&path).unwrap()).unwrap();

    let states = [0.0, 0.0, 0.25, 0.5, 1.0, 1.0];
    let expected = g.predict(&Tensor::new(&[3, 2], states.to_vec()).unwrap()).unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(nrm_grounder_load(c_path.as_ptr(), &mut h), NrmStatus::Ok);
        let mut out = [usize::MAX; 3];
        assert_eq!(nrm_grounder_predict(h, states.as_ptr(), 3, 2, out.as_mut_ptr()), NrmStatus::Ok);
        assert_eq!(out.to_vec(), expected);
        assert_eq!(nrm_grounder_predict(h, states.as_ptr(), 2, 3, out.as_mut_ptr()), NrmStatus::InvalidInput);
        nrm_grounder_free(h);
    }
}
