use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use fktoda_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        fkt_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn lattice(json: &str) -> *mut FktLattice {
    let json = CString::new(json).unwrap();
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { fkt_lattice_from_config(json.as_ptr(), &mut l) }, FktStatus::Ok, "{}", last_error());
    l
}

#[test]
fn stationary_lattice_round_trip() {
    let l = lattice(r#"{"initial": "stationary", "truncation": 3}"#);
    unsafe {
        assert_eq!(fkt_lattice_n_blocks(l), 3);
        let mut z = [0.0; 2];
        assert_eq!(fkt_lattice_get(l, b'b' as _, 4, z.as_mut_ptr()), FktStatus::Ok);
        assert_eq!(z, [4.0, 0.0]);
        assert_eq!(fkt_lattice_set(l, b'a' as _, 2, 0.5, -0.25), FktStatus::Ok);
        assert_eq!(fkt_lattice_get(l, b'a' as _, 2, z.as_mut_ptr()), FktStatus::Ok);
        assert_eq!(z, [0.5, -0.25]);
        fkt_lattice_free(l);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut l = ptr::null_mut();
        assert_eq!(fkt_lattice_zeros(0, &mut l), FktStatus::InvalidInput);
        assert!(last_error().contains("n_blocks"));
        assert_eq!(fkt_lattice_zeros(2, ptr::null_mut()), FktStatus::NullPointer);

        let bad = CString::new(r#"{"initial": "zero", "truncation": 2, "typo": 1}"#).unwrap();
        assert_eq!(fkt_lattice_from_config(bad.as_ptr(), &mut l), FktStatus::Config);
        assert!(last_error().contains("typo"));

        assert_eq!(fkt_lattice_zeros(2, &mut l), FktStatus::Ok);
        assert_eq!(fkt_last_error(ptr::null_mut(), 0), 0);
        assert_eq!(fkt_lattice_set(l, b'q' as _, 1, 1.0, 0.0), FktStatus::InvalidInput);
        let mut buf = [0.0; 8];
        let mut len = 0;
        assert_eq!(fkt_lattice_spectrum(l, buf.as_mut_ptr(), 1, &mut len), FktStatus::BufferTooSmall);
        assert_eq!(len, 4);
        // the zero operator has z = 0 in its spectrum
        assert_eq!(fkt_lattice_weyl(l, 0.0, 0.0, buf.as_mut_ptr()), FktStatus::Singular);
        fkt_lattice_free(l);
        fkt_lattice_free(ptr::null_mut());
    }
}

#[test]
fn spectrum_and_resolvent_of_a_diagonal_operator() {
    // stationary preset: J = diag(1, 2, ..., 2N)
    let l = lattice(r#"{"initial": "stationary", "truncation": 2}"#);
    unsafe {
        let mut ev = [0.0; 8];
        let mut len = 0;
        assert_eq!(fkt_lattice_spectrum(l, ev.as_mut_ptr(), 4, &mut len), FktStatus::Ok);
        assert_eq!(len, 4);
        for k in 0..4 {
            assert!((ev[2 * k] - (k + 1) as f64).abs() < 1e-12 && ev[2 * k + 1].abs() < 1e-12);
        }
        let mut r = [0.0; 8];
        assert_eq!(fkt_lattice_weyl(l, 0.0, 1.0, r.as_mut_ptr()), FktStatus::Ok);
        // 1 / (i - 1) and 1 / (i - 2) on the diagonal
        let expect = [-0.5, -0.5, 0.0, 0.0, 0.0, 0.0, -0.4, -0.2];
        for (a, b) in r.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{r:?}");
        }
        fkt_lattice_free(l);
    }
}

#[test]
fn evolve_then_reconstruct() {
    let l = lattice(r#"{"initial": {"preset": "random-seeded", "seed": 3}, "truncation": 6}"#);
    unsafe {
        let mut traj = ptr::null_mut();
        assert_eq!(fkt_evolve(l, 1e-2, 0.1, 5, &mut traj), FktStatus::Ok, "{}", last_error());
        assert_eq!(fkt_trajectory_len(traj), 3);
        let mut end = ptr::null_mut();
        assert_eq!(fkt_trajectory_state(traj, 2, &mut end), FktStatus::Ok);
        assert!((fkt_lattice_time(end) - 0.1).abs() < 1e-15);
        assert_eq!(fkt_trajectory_state(traj, 3, &mut end), FktStatus::InvalidInput);
        let mut res = f64::NAN;
        assert_eq!(fkt_lattice_commutator_residual(end, &mut res), FktStatus::Ok);
        assert!(res < 1e-12);

        let mut u = ptr::null_mut();
        assert_eq!(fkt_functional_from_lattice(end, 40, &mut u), FktStatus::Ok);
        assert!(fkt_functional_n_block_moments(u) > 10);
        let mut m0 = [0.0; 8];
        assert_eq!(fkt_functional_block_moment(u, 0, m0.as_mut_ptr()), FktStatus::Ok);

        let mut a1 = [0.0; 2];
        fkt_lattice_get(end, b'a' as _, 1, a1.as_mut_ptr());
        let mut blocks = vec![0.0; 24 * 3];
        assert_eq!(fkt_reconstruct(u, a1[0], a1[1], 2, blocks.as_mut_ptr()), FktStatus::Ok, "{}", last_error());
        // B_0 entry (1,1) is b_1
        let mut b1 = [0.0; 2];
        fkt_lattice_get(end, b'b' as _, 1, b1.as_mut_ptr());
        assert!((blocks[8] - b1[0]).abs() < 1e-10 && (blocks[9] - b1[1]).abs() < 1e-10);
        // A_0 entry (2,1) is a_3
        let mut a3 = [0.0; 2];
        fkt_lattice_get(end, b'a' as _, 3, a3.as_mut_ptr());
        assert!((blocks[4] - a3[0]).abs() < 1e-10);

        fkt_functional_free(u);
        fkt_lattice_free(end);
        fkt_trajectory_free(traj);
        fkt_lattice_free(l);
    }
}

#[test]
fn verify_returns_json_report() {
    let json = CString::new(r#"{"initial": "interior-bump", "truncation": 4, "flow": {"t_end": 0.1, "h": 0.01}}"#)
        .unwrap();
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(fkt_verify_json(json.as_ptr(), &mut out), FktStatus::Ok, "{}", last_error());
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        fkt_string_free(out);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["flow"]["block_system"]["value"].as_f64().unwrap() < 1e-8);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fktoda.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in ["fkt_last_error", "fkt_lattice_from_config", "fkt_evolve", "fkt_reconstruct", "fkt_verify_json"] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

/// Compiles a small C program against the header and the static library when a C compiler is present.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libfktoda_ffi.a");
    if !lib.exists() {
        return;
    }
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "fktoda.h"
int main(void) {
    FktLattice *l = NULL;
    if (fkt_lattice_from_config("{\"initial\": \"stationary\", \"truncation\": 2}", &l) != FKT_STATUS_OK) return 1;
    double ev[8]; size_t len = 0;
    if (fkt_lattice_spectrum(l, ev, 4, &len) != FKT_STATUS_OK || len != 4) return 2;
    if (fkt_lattice_set(l, 'x', 1, 0.0, 0.0) != FKT_STATUS_INVALID_INPUT) return 3;
    char msg[128];
    if (fkt_last_error(msg, sizeof msg) == 0) return 4;
    fkt_lattice_free(l);
    printf("%.1f %.1f\n", ev[0], ev[6]);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "C program exited with {:?}", run.status);
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "1.0 4.0");
}
