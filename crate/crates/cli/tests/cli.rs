use std::process::{Command, Output};

fn rgg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgg-lab"))
        .args(args)
        .env_remove("RGG_LAB_JOBS")
        .output()
        .expect("binary runs")
}

fn header(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn csv_headers() {
    let cases: [(&[&str], &str); 5] = [
        (
            &["threshold", "--property", "complete", "--n", "20", "--d", "2", "--eps", "0.1", "--trials", "20"],
            "n,d,property,eps,trials,seed,r_lo,r_hi,width,r_median,r_c,width_over_rc",
        ),
        (
            &["scaling", "--experiment", "matching", "--d", "1", "--n-list", "8,16", "--trials", "5"],
            "n,d,p_norm,method,trials,seed,median_Mn,q10_Mn,q90_Mn,r_c,median_ratio",
        ),
        (
            &["bottleneck", "--n", "10", "--d", "2"],
            "n,d,p_norm,seed,method,weight,steps,shift_red,shift_blue,shift_bound",
        ),
        (
            &["bernoulli", "--n", "4", "--p", "0.5", "--big-p", "0.5", "--trials", "100"],
            "n,p,P,trials,seed,mc_estimate,closed_form,abs_error,three_sigma",
        ),
        (
            &["containment", "--n", "16", "--d", "2", "--gamma", "0.3", "--trials", "5"],
            "n,d,r,gamma,trials,seed,frac_Mn_le_gamma,frac_embedding_ok",
        ),
    ];
    for (args, expected) in cases {
        assert_eq!(header(&rgg(args)), expected, "{args:?}");
    }
}

#[test]
fn invalid_configuration_exits_with_2() {
    let bad: [&[&str]; 4] = [
        &["threshold", "--property", "planar", "--n", "20", "--d", "2", "--eps", "0.1", "--trials", "20"],
        &["threshold", "--property", "complete", "--n", "20", "--d", "2", "--eps", "0.1", "--trials", "5"],
        &["bottleneck", "--n", "10", "--d", "2", "--p-norm", "1"],
        &["bernoulli", "--n", "4", "--p", "1.5", "--big-p", "0.5", "--trials", "10"],
    ];
    for args in bad {
        let out = rgg(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn csv_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let args = ["threshold", "--property", "connectivity", "--n", "50", "--d", "2", "--eps", "0.1", "--trials", "20"];
    let to_stdout = rgg(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--csv", path.to_str().unwrap()]);
    assert!(rgg(&with_file).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn dump_graph_header() {
    let out = rgg(&["dump-graph", "--n", "5", "--d", "2", "--r", "0.5", "--seed", "9"]);
    assert_eq!(header(&out), "5 2 0.5 2 9");
}
