use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use skewsplit_ffi::*;

fn last_error() -> String {
    let p = sk_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// tridiag(-1, 2, -1) plus a skew coupling of size `b`.
fn tridiag(n: usize, b: f64) -> *mut SkMatrix {
    let mut rp = vec![0usize];
    let mut ci = Vec::new();
    let mut vals = Vec::new();
    for i in 0..n {
        if i > 0 {
            ci.push(i - 1);
            vals.push(-1.0 - b);
        }
        ci.push(i);
        vals.push(2.0);
        if i + 1 < n {
            ci.push(i + 1);
            vals.push(-1.0 + b);
        }
        rp.push(ci.len());
    }
    let mut m = ptr::null_mut();
    let st = unsafe { sk_matrix_from_csr(n, n, rp.as_ptr(), ci.as_ptr(), vals.as_ptr(), &mut m) };
    assert_eq!(st, SkStatus::Ok);
    m
}

#[test]
fn csr_spmv_and_shape() {
    let m = tridiag(3, 0.0);
    let (mut r, mut c, mut nnz) = (0, 0, 0);
    unsafe {
        assert_eq!(sk_matrix_shape(m, &mut r, &mut c, &mut nnz), SkStatus::Ok);
        assert_eq!((r, c, nnz), (3, 3, 7));
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        assert_eq!(sk_matrix_spmv(m, x.as_ptr(), 3, y.as_mut_ptr(), 3), SkStatus::Ok);
        assert_eq!(y, [0.0, 0.0, 4.0]);
        assert_eq!(sk_matrix_spmv(m, x.as_ptr(), 2, y.as_mut_ptr(), 3), SkStatus::Shape);
        assert!(last_error().contains("shape"));
        sk_matrix_free(m);
    }
}

#[test]
fn triplets_sum_duplicates() {
    let rows = [0usize, 0, 1];
    let cols = [0usize, 0, 1];
    let vals = [1.0, 2.0, 5.0];
    let mut m = ptr::null_mut();
    unsafe {
        let st = sk_matrix_from_triplets(2, 2, 3, rows.as_ptr(), cols.as_ptr(), vals.as_ptr(), &mut m);
        assert_eq!(st, SkStatus::Ok);
        let mut y = [0.0; 2];
        sk_matrix_spmv(m, [1.0, 1.0].as_ptr(), 2, y.as_mut_ptr(), 2);
        assert_eq!(y, [3.0, 5.0]);
        sk_matrix_free(m);
        let bad = [5usize];
        let st = sk_matrix_from_triplets(2, 2, 1, bad.as_ptr(), cols.as_ptr(), vals.as_ptr(), &mut m);
        assert_eq!(st, SkStatus::InvalidArgument);
    }
}

#[test]
fn null_handles_are_reported() {
    unsafe {
        assert_eq!(sk_matrix_shape(ptr::null(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), SkStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut s = ptr::null_mut();
        assert_eq!(sk_split_new(ptr::null(), &mut s), SkStatus::NullPointer);
        sk_matrix_free(ptr::null_mut());
        sk_split_free(ptr::null_mut());
    }
}

#[test]
fn split_parts_and_solve() {
    let m = tridiag(50, 0.4);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(sk_split_new(m, &mut s), SkStatus::Ok);
        let mut n = 0;
        sk_split_dim(s, &mut n);
        assert_eq!(n, 50);
        let mut skew = ptr::null_mut();
        assert_eq!(sk_split_part(s, 1, &mut skew), SkStatus::Ok);
        let mut y = [0.0; 50];
        sk_matrix_spmv(skew, [1.0; 50].as_ptr(), 50, y.as_mut_ptr(), 50);
        assert!((y[0] - 0.4).abs() < 1e-15 && y[10].abs() < 1e-15);
        assert_eq!(sk_split_part(s, 7, &mut skew), SkStatus::InvalidArgument);
        sk_matrix_free(skew);

        let b = vec![1.0; 50];
        for method in [SkMethod::Gmres, SkMethod::Widlund, SkMethod::Rapoport, SkMethod::Direct] {
            let mut opts = sk_solver_options_default();
            opts.method = method;
            opts.tol = 1e-10;
            let mut x = vec![0.0; 50];
            let mut rep = SkSolveReport::default();
            assert_eq!(sk_solve(s, b.as_ptr(), x.as_mut_ptr(), 50, &opts, &mut rep), SkStatus::Ok);
            assert!(rep.converged, "{method:?}");
            let mut ax = vec![0.0; 50];
            sk_matrix_spmv(m, x.as_ptr(), 50, ax.as_mut_ptr(), 50);
            let res: f64 = ax.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            // GMRES stops on the H-preconditioned residual, which can be
            // smaller than the true one by up to cond(H) ~ 1e3 here.
            assert!(res < 1e-6, "{method:?}: {res}");
        }
        sk_split_free(s);
        sk_matrix_free(m);
    }
}

#[test]
fn multigrid_needs_grid() {
    let mut a = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(sk_problem_assemble(SkProblem::AdvDiff, 1, 32, ptr::null(), &mut a), SkStatus::Ok);
        sk_split_new(a, &mut s);
        let b = vec![1.0; 31];
        let mut x = vec![0.0; 31];
        let mut opts = sk_solver_options_default();
        opts.method = SkMethod::Gmres;
        opts.precond = SkPrecond::Multigrid;
        assert_ne!(sk_solve(s, b.as_ptr(), x.as_mut_ptr(), 31, &opts, ptr::null_mut()), SkStatus::Ok);
        opts.grid_dims = 1;
        opts.grid[0] = 31;
        let mut rep = SkSolveReport::default();
        assert_eq!(sk_solve(s, b.as_ptr(), x.as_mut_ptr(), 31, &opts, &mut rep), SkStatus::Ok);
        assert!(rep.converged);
        sk_split_free(s);
        sk_matrix_free(a);
    }
}

#[test]
fn spectra_entry_points() {
    let mut m = ptr::null_mut();
    let rows = [0usize, 1];
    let vals = [1.0, 10.0];
    unsafe {
        sk_matrix_from_triplets(2, 2, 2, rows.as_ptr(), rows.as_ptr(), vals.as_ptr(), &mut m);
        for method in [0, 1, 2] {
            let mut sp = SkSpectrum::default();
            assert_eq!(sk_cond2(m, method, &mut sp), SkStatus::Ok);
            assert!((sp.kappa2 - 10.0).abs() < 1e-6, "{method}: {}", sp.kappa2);
        }
        let mut sp = SkSpectrum::default();
        assert_eq!(sk_cond2(m, 9, &mut sp), SkStatus::InvalidArgument);
        sk_matrix_free(m);

        // H = 2I, S = [[0, 2], [-2, 0]] has width 1.
        let r = [0usize, 0, 1, 1];
        let c = [0usize, 1, 0, 1];
        let v = [2.0, 2.0, -2.0, 2.0];
        sk_matrix_from_triplets(2, 2, 4, r.as_ptr(), c.as_ptr(), v.as_ptr(), &mut m);
        let mut s = ptr::null_mut();
        sk_split_new(m, &mut s);
        let mut w = 0.0;
        assert_eq!(sk_spectral_width(s, &mut w), SkStatus::Ok);
        assert!((w - 1.0).abs() < 1e-10);
        sk_split_free(s);
        sk_matrix_free(m);
    }
}

#[test]
fn ocp_identity_closed_form() {
    let n = 4;
    let rows: Vec<usize> = (0..n).collect();
    let ones = vec![1.0; n];
    let mut m = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        sk_matrix_from_triplets(n, n, n, rows.as_ptr(), rows.as_ptr(), ones.as_ptr(), &mut m);
        sk_split_new(m, &mut s);
        let f = vec![0.0; n];
        for mode in [SkOcpMode::Condensed, SkOcpMode::Ppcg, SkOcpMode::Schur] {
            let (mut x, mut u, mut p) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            let mut rep = SkOcpReport::default();
            let st = sk_ocp_solve(
                s,
                0.5,
                f.as_ptr(),
                ones.as_ptr(),
                n,
                mode,
                SkInner::Direct,
                1e-12,
                x.as_mut_ptr(),
                u.as_mut_ptr(),
                p.as_mut_ptr(),
                &mut rep,
            );
            assert_eq!(st, SkStatus::Ok, "{mode:?}: {}", last_error());
            assert!(rep.converged);
            for v in &u {
                assert!((v - 1.0 / 1.5).abs() < 1e-10, "{mode:?}: {v}");
            }
        }
        let (mut x, mut u, mut p) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let st = sk_ocp_solve(
            s,
            -1.0,
            f.as_ptr(),
            ones.as_ptr(),
            n,
            SkOcpMode::Condensed,
            SkInner::Direct,
            1e-8,
            x.as_mut_ptr(),
            u.as_mut_ptr(),
            p.as_mut_ptr(),
            ptr::null_mut(),
        );
        assert_eq!(st, SkStatus::InvalidArgument);
        sk_split_free(s);
        sk_matrix_free(m);
    }
}

#[test]
fn matrix_market_round_trip() {
    let dir = std::env::temp_dir().join(format!("skewsplit-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = CString::new(dir.join("a.mtx").to_str().unwrap()).unwrap();
    let mut a = ptr::null_mut();
    let mut back = ptr::null_mut();
    unsafe {
        let params = sk_problem_params_default(SkProblem::Oseen, 2);
        assert_eq!(params.b[..2], [1.0, 1.0]);
        assert_eq!(sk_problem_assemble(SkProblem::Oseen, 2, 4, &params, &mut a), SkStatus::Ok);
        assert_eq!(sk_matrix_write_mm(a, path.as_ptr()), SkStatus::Ok);
        assert_eq!(sk_matrix_read_mm(path.as_ptr(), &mut back), SkStatus::Ok);
        let (mut n1, mut z1, mut n2, mut z2) = (0, 0, 0, 0);
        sk_matrix_shape(a, &mut n1, ptr::null_mut(), &mut z1);
        sk_matrix_shape(back, &mut n2, ptr::null_mut(), &mut z2);
        assert_eq!((n1, z1), (n2, z2));
        let x: Vec<f64> = (0..n1).map(|i| (i as f64).sin()).collect();
        let (mut y1, mut y2) = (vec![0.0; n1], vec![0.0; n1]);
        sk_matrix_spmv(a, x.as_ptr(), n1, y1.as_mut_ptr(), n1);
        sk_matrix_spmv(back, x.as_ptr(), n1, y2.as_mut_ptr(), n1);
        assert_eq!(y1, y2);
        let missing = CString::new(dir.join("missing.mtx").to_str().unwrap()).unwrap();
        assert_eq!(sk_matrix_read_mm(missing.as_ptr(), &mut back), SkStatus::Io);
        sk_matrix_free(a);
        sk_matrix_free(back);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(sk_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("skewsplit.h")).unwrap();
    for name in ["sk_solve", "sk_ocp_solve", "sk_last_error", "SK_STATUS_OK", "typedef struct SkMatrix SkMatrix"] {
        assert!(header.contains(name), "header lacks {name}");
    }
    let src = std::env::temp_dir().join(format!("skewsplit-header-{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"skewsplit.h\"\nint main(void) { SkSolverOptions o = sk_solver_options_default(); return (int)o.method; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .status();
    std::fs::remove_file(&src).ok();
    match status {
        Ok(s) => assert!(s.success(), "header does not compile"),
        Err(e) => eprintln!("skipping C compile check: {e}"),
    }
}
