use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hdmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdmd")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

// 10×10 centers on [−3, 3]²; spread over the default [−4, 4]² they are too
// sparse for width 3 and the ground state lands near 1.065
const SMALL_BENCH: &str = "hdmd-config 1\ngrid = 40\ndictionary.per_axis = 10\ndictionary.lower = -3\ndictionary.upper = 3\nexact_resolution = 120\n";

#[test]
fn small_benchmark_finds_ground_state() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bench.cfg", SMALL_BENCH);
    let out = tmp.path().join("out");
    let o = hdmd(&["schrodinger", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["eigenvalues.csv", "measure.csv", "clustered.csv", "summary.json", "exact_spectrum.csv", "exact_weights.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let eig = read_rows(&out.join("eigenvalues.csv"));
    assert_eq!(eig.len(), 100);
    let first: f64 = eig[0][1].parse().unwrap();
    assert!((first - 1.0).abs() < 0.05, "ground state {first}");

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["hermiticity_residual"].as_f64().unwrap() <= 1e-8);
    let mass = summary["total_mass"].as_f64().unwrap();
    let norm = summary["observable_gram_norm_sq"].as_f64().unwrap();
    assert!((mass - norm).abs() <= 1e-10 * norm);
    assert_eq!(summary["dictionary_size"], 100);

    let clustered = read_rows(&out.join("clustered.csv"));
    let e3 = clustered.iter().find(|r| r[0] == "3.0").expect("E=3 row");
    let w: f64 = e3[2].parse().unwrap();
    let exact: f64 = e3[3].parse().unwrap();
    assert!((exact - 3.557).abs() < 1e-2);
    assert!(w > 0.0);
}

#[test]
fn same_config_gives_identical_csv() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "mc.cfg", &format!("{SMALL_BENCH}quadrature = monte-carlo\nseed = 7\n"));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = hdmd(&["schrodinger", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["eigenvalues.csv", "measure.csv", "clustered.csv", "exact_weights.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn config_errors_exit_with_code_two() {
    let tmp = TempDir::new().unwrap();
    for (name, text, needle) in [
        ("neg.cfg", "hdmd-config 1\ndictionary.width = -3\n", "dictionary.width"),
        ("unknown.cfg", "hdmd-config 1\nwidht = 3\n", "widht"),
        ("noheader.cfg", "grid = 40\n", "hdmd-config"),
        ("mismatch.cfg", "hdmd-config 1\nexperiment = probes\n", "experiment"),
    ] {
        let cfg = write(tmp.path(), name, text);
        let o = hdmd(&["schrodinger", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let o = hdmd(&["schrodinger", "--config", tmp.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn probes_write_tables() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "p.cfg",
        "hdmd-config 1\nexperiment = probes\nprobe.reference_size = 200\nprobe.sizes = 5, 10, 50, 100\n",
    );
    let out = tmp.path().join("p");
    let o = hdmd(&["probes", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for kind in ["resolvent", "moments", "weak"] {
        for rows in [read_rows(&out.join(format!("diagonal_{kind}.csv")))] {
            assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0), "diagonal {kind}");
        }
        assert!(out.join(format!("jacobi_{kind}.csv")).exists());
    }
    // ‖P_n e₁‖² = ‖e₁‖², so the k = 0 moment gap is zero
    let moments = read_rows(&out.join("jacobi_moments.csv"));
    assert!(moments.iter().filter(|r| r[1] == "k=0").all(|r| r[2].parse::<f64>().unwrap() == 0.0));
    let res = read_rows(&out.join("jacobi_resolvent.csv"));
    let at_100: f64 = res.iter().find(|r| r[0] == "100" && r[1] == "resolvent").unwrap()[2].parse().unwrap();
    assert!(at_100 < 1e-2);
    assert!(res.iter().any(|r| r[1] == "resolvent:floor"));
}

/// `K = G⁻¹H` for a 3×3 real symmetric `G`, by Cramer's rule.
fn solve3(g: [[f64; 3]; 3], h: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(g);
    let mut k = [[0.0; 3]; 3];
    for col in 0..3 {
        for row in 0..3 {
            let mut m = g;
            for i in 0..3 {
                m[i][row] = h[i][col];
            }
            k[row][col] = det(m) / d;
        }
    }
    k
}

#[test]
fn custom_recovers_planted_operator() {
    let tmp = TempDir::new().unwrap();
    let m = 12;
    let xs: Vec<[f64; 3]> = (0..m)
        .map(|i| {
            let t = i as f64;
            [(0.7 * t).sin() + 0.1, (1.3 * t + 0.2).cos(), 0.05 * t - 0.3]
        })
        .collect();
    let mut g = [[0.0; 3]; 3];
    for x in &xs {
        for a in 0..3 {
            for b in 0..3 {
                g[a][b] += x[a] * x[b] / m as f64;
            }
        }
    }
    let h = [[1.0, 0.3, -0.2], [0.3, -0.5, 0.7], [-0.2, 0.7, 2.0]];
    let k = solve3(g, h);
    let ys: Vec<[f64; 3]> = xs
        .iter()
        .map(|x| {
            let mut y = [0.0; 3];
            for j in 0..3 {
                y[j] = (0..3).map(|i| x[i] * k[i][j]).sum();
            }
            y
        })
        .collect();
    let csv = |rows: &[[f64; 3]]| {
        let mut s = String::from("a,b,c\n");
        for r in rows {
            s += &format!("{:e},{:e},{:e}\n", r[0], r[1], r[2]);
        }
        s
    };
    let x = write(tmp.path(), "x.csv", &csv(&xs));
    let y = write(tmp.path(), "y.csv", &csv(&ys));
    let out = tmp.path().join("c");
    let o = hdmd(&["custom", "--x", &x, "--y", &y, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let got = hdmd::io::read_matrix_csv(fs::File::open(out.join("k_hermitian.csv")).unwrap()).unwrap();
    let mut err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            err = err.max((got[(i, j)] - hdmd::c64::new(k[i][j], 0.0)).norm());
        }
    }
    assert!(err < 1e-8, "{err}");
    assert!(out.join("k_edmd.csv").exists());
}

#[test]
fn custom_identity_with_constant_dictionary() {
    let tmp = TempDir::new().unwrap();
    let data = "x,y\n0.1,0.2\n0.5,-1\n2,3\n";
    let x = write(tmp.path(), "x.csv", data);
    let cfg = write(tmp.path(), "c.cfg", "hdmd-config 1\ncustom.dictionary = constant\n");
    let out = tmp.path().join("c");
    let o = hdmd(&["custom", "--config", &cfg, "--x", &x, "--y", &x, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let eig = read_rows(&out.join("eigenvalues.csv"));
    assert_eq!(eig.len(), 1);
    assert_eq!(eig[0][1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn custom_input_errors() {
    let tmp = TempDir::new().unwrap();
    let empty = write(tmp.path(), "empty.csv", "");
    let good = write(tmp.path(), "good.csv", "a,b\n1,2\n3,4\n");
    let bad = write(tmp.path(), "bad.csv", "a,b\n1,2\n3,oops\n");
    let short = write(tmp.path(), "short.csv", "a,b\n1,2\n");
    let o = hdmd(&["custom", "--x", &empty, "--y", &empty, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = hdmd(&["custom", "--x", &good, "--y", &bad, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));
    let o = hdmd(&["custom", "--x", &good, "--y", &short, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
