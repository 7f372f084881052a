use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use ris_floquet::profile::table::parse_table;
use ris_floquet::profile::z2_geometric_optics;
use ris_floquet::ScatterScenario;

fn risfloq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risfloq")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Data rows after the column header, split on commas.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn harmonic_row(text: &str, n: i32) -> Vec<String> {
    rows(text).into_iter().find(|r| r[0] == n.to_string()).unwrap()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn solve_global_optimal_defaults() {
    let out = risfloq(&["solve"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# profile.kind = z3"));
    assert!(text.contains("# frequency_ghz = 28"));
    assert!(text.contains("n,Re(B_n),Im(B_n),abs(B_n),mode_class,theta_deg,power_fraction\n"));
    let r = harmonic_row(&text, 1);
    assert!((num(&r[3]) - 1.7103).abs() < 2e-3);
    assert!((num(&r[6]) - 1.0).abs() < 2e-3);
    assert_eq!(r[4], "propagating");
    assert_eq!(r[5], "70.000000");
    let r = harmonic_row(&text, 2);
    assert_eq!((r[4].as_str(), r[5].as_str(), r[6].as_str()), ("evanescent", "", "0"));
    assert_eq!(rows(&text).len(), 61);
    assert!(stderr(&out).contains("residual"));
}

#[test]
fn solve_geometric_optics_and_cotangent() {
    let text = stdout(&risfloq(&["solve", "--profile", "z2"]));
    let r = harmonic_row(&text, 1);
    assert!((num(&r[3]) - 1.0).abs() < 1e-3);
    assert!((num(&r[6]) - 0.342).abs() < 1e-3);

    let text = stdout(&risfloq(&["solve", "--profile", "z1"]));
    let fractions: Vec<f64> = [-1, 0, 1].iter().map(|&n| num(&harmonic_row(&text, n)[6])).collect();
    assert!(fractions.iter().all(|&p| p > 0.0));
    assert!((fractions.iter().sum::<f64>() - 1.0).abs() < 1e-6);
}

#[test]
fn pattern_output() {
    let out = risfloq(&["pattern", "--profile", "pec", "--grid-size", "361"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("theta_deg,normalized,normalized_dB,P_rad_rel\n"));
    assert!(text.contains("# peak_theta_deg = 0.000000"));
    assert!(text.contains("# sinc_argument = literal"));
    let data = rows(&text);
    assert_eq!(data.len(), 361);
    assert_eq!(data[0][0], "-90.000000");
    assert_eq!(data[360][0], "90.000000");
    let peak = data.iter().find(|r| r[1] == "1").unwrap();
    assert_eq!(peak[0], "0.000000");
    assert_eq!(peak[2], "0");
    assert!(data.iter().all(|r| num(&r[2]) >= -120.0 && num(&r[3]) >= 0.0));

    let out = risfloq(&["pattern", "--grid-size", "100"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweeps() {
    let text = stdout(&risfloq(&["sweep", "--profile", "z2", "--variable", "N", "--values", "5,10,30"]));
    assert!(text.contains("index,variable,value,efficiency,total_reflected,residual,status\n"));
    for r in rows(&text) {
        assert_eq!(r[6], "ok");
        assert!((num(&r[3]) - 0.342).abs() < 1e-3);
    }

    let out = risfloq(&["sweep", "--profile", "z3", "--variable", "theta_r_deg", "--values", "0,30,-50,70"]);
    assert!(out.status.success());
    let data = rows(&stdout(&out));
    assert!(data[0][6].starts_with("error[DegenerateGeometry]"));
    for r in &data[1..] {
        assert!((num(&r[3]) - 1.0).abs() < 2e-3, "{r:?}");
    }

    let out = risfloq(&["sweep", "--variable", "theta_r_deg", "--values", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[DegenerateGeometry]"));

    let text = stdout(&risfloq(&["sweep", "--profile", "z3", "--variable", "frequency_ghz", "--values", "10,28"]));
    assert!(rows(&text).iter().all(|r| r[6] == "ok"));
}

#[test]
fn design_matches_geometric_optics() {
    let out = risfloq(&["design", "--modes", "1=1", "--table-points", "64"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# recovered B_1 = "));
    assert!(text.contains("# profile.kind = modes"));
    let table = parse_table(&text).unwrap();
    let s = ScatterScenario::from_angles(28e9, 0.0, 70f64.to_radians(), 30, 5.0).unwrap();
    assert_eq!(table.period, s.period());
    let z2 = z2_geometric_optics(&s).unwrap();
    let scale = s.eta0();
    for (y, z) in &table.samples {
        assert!((z - z2.eval(*y).unwrap()).norm() <= 1e-9 * scale, "y = {y}");
    }

    let table = parse_table(&stdout(&risfloq(&["design", "--modes", "0=-1", "--table-points", "16"]))).unwrap();
    assert!(table.samples.iter().all(|(_, z)| z.norm() == 0.0));
}

#[test]
fn design_rejects_singular_modes() {
    let b = 1.0 / 70f64.to_radians().cos();
    let out = risfloq(&["design", "--modes", &format!("1={b}")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("error[SingularProfile]"));
    assert!(stderr(&out).contains("y = "));

    let out = risfloq(&["design"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn designed_table_feeds_the_tabulated_profile() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("z.txt");
    let t = table.to_str().unwrap();
    let out = risfloq(&["design", "--modes", "1=0.8-0.3i,0=0.2", "--table-points", "4096", "-o", t]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());

    let text = stdout(&risfloq(&["solve", "--profile", "tabulated", "--table", t, "--truncation", "20"]));
    let r = harmonic_row(&text, 1);
    let b1 = Complex64::new(num(&r[1]), num(&r[2]));
    assert!((b1 - Complex64::new(0.8, -0.3)).norm() < 1e-3, "{b1}");
    assert!(text.contains(&format!("# profile.table = {t}")));
}

#[test]
fn verify_exit_codes() {
    let out = risfloq(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("name,tolerance,value,status,detail\n"));
    assert!(text.contains("z1_power_conservation,"));
    assert!(!text.contains(",FAIL,"));

    assert_eq!(risfloq(&["verify", "--tolerance-scale", "1e-30"]).status.code(), Some(1));
    let out = risfloq(&["verify", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("z1_power_conservation"));

    let out = risfloq(&["verify", "--profile", "tabulated", "--table", "/no/such/table.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[ConfigError]"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "truncation = 8\ntheta_r_deg = 50.0\n\n[profile]\nkind = \"z2\"\n").unwrap();
    let c = cfg.to_str().unwrap();

    let text = stdout(&risfloq(&["solve", "--config", c]));
    assert!(text.contains("# truncation = 8"));
    assert!(text.contains("# theta_r_deg = 50"));
    assert_eq!(rows(&text).len(), 17);
    assert!((num(&harmonic_row(&text, 1)[6]) - 50f64.to_radians().cos()).abs() < 1e-3);

    let text = stdout(&risfloq(&["solve", "--config", c, "--truncation", "4"]));
    assert_eq!(rows(&text).len(), 9);

    std::fs::write(&cfg, "truncation = 8\nbogus = 1\n").unwrap();
    let out = risfloq(&["solve", "--config", c]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[ConfigError]"));

    assert_eq!(risfloq(&["solve", "--config", "/no/such.toml"]).status.code(), Some(2));
    assert_eq!(risfloq(&["solve", "--theta-r-deg", "95"]).status.code(), Some(2));
    assert_eq!(risfloq(&["solve", "--profile", "tabulated"]).status.code(), Some(2));
}

#[test]
fn relative_table_in_config_resolves_next_to_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = risfloq(&["design", "--modes", "1=1", "-o", dir.path().join("t.txt").to_str().unwrap()]);
    assert!(out.status.success());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "truncation = 6\n[profile]\nkind = \"tabulated\"\ntable = \"t.txt\"\n").unwrap();
    let out = risfloq(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(Path::new(&dir.path().join("t.txt")).exists());
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let out = risfloq(&["solve", "--profile", "z2", "--truncation", "3", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(rows(&text).len(), 7);

    let out = risfloq(&["solve", "-o", "/no/such/dir/h.csv"]);
    assert_eq!(out.status.code(), Some(2));
}
