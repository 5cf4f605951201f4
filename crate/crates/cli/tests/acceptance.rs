//! Acceptance suite: runs the CLI over the required chain sweeps and prints
//! one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bethe_cli::{run_command, CheckRecord, Report};

struct Runner {
    dir: tempfile::TempDir,
    count: std::cell::Cell<usize>,
}

impl Runner {
    fn new() -> Self {
        Runner { dir: tempfile::tempdir().expect("temp dir"), count: std::cell::Cell::new(0) }
    }

    fn path(&self, stem: &str) -> PathBuf {
        let k = self.count.get();
        self.count.set(k + 1);
        self.dir.path().join(format!("{k:03}-{stem}"))
    }

    /// Runs `command` on a random chain of rank `n` and length `l`.
    fn run(&self, command: &str, n: usize, l: usize, seed: u64, extra: &str) -> (i32, Report, PathBuf) {
        let cfg = self.path(&format!("{command}-{n}-{l}.cfg"));
        std::fs::write(&cfg, format!("n = {n}\nl = {l}\nseed = {seed}\n{extra}")).expect("write config");
        let out = self.path(&format!("{command}-{n}-{l}.json"));
        let (code, report) = run_command(args(command, &cfg, &out));
        let report = report.unwrap_or_else(|| panic!("{command} N={n} L={l} produced no report (exit {code})"));
        (code, report, out)
    }
}

fn args(command: &str, cfg: &Path, out: &Path) -> Vec<String> {
    vec![
        "bethe-lab".into(),
        command.into(),
        "--config".into(),
        cfg.display().to_string(),
        "--out".into(),
        out.display().to_string(),
        "--quiet".into(),
    ]
}

fn seed(n: usize, l: usize) -> u64 {
    1000 + 10 * n as u64 + l as u64
}

/// Outcome of one criterion.
struct Verdict {
    pass: bool,
    summary: String,
}

impl Verdict {
    /// Passes when `checks` is non-empty, every check passes and `extra` holds.
    fn from_checks<'a>(checks: impl IntoIterator<Item = &'a CheckRecord>, extra: Result<String, String>) -> Self {
        let checks: Vec<&CheckRecord> = checks.into_iter().collect();
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
        let worst = checks
            .iter()
            .filter_map(|c| c.residual.filter(|_| c.tolerance > 0.0).map(|r| r / c.tolerance))
            .fold(0.0, f64::max);
        let mut summary = format!("{}/{} checks", checks.len() - failed.len(), checks.len());
        if worst > 0.0 {
            summary.push_str(&format!(", worst residual/tolerance {worst:.2e}"));
        }
        let mut pass = !checks.is_empty() && failed.is_empty();
        if checks.is_empty() {
            summary.push_str("; no checks ran");
        }
        if !failed.is_empty() {
            summary.push_str(&format!("; failed: {}", failed.iter().take(5).cloned().collect::<Vec<_>>().join(", ")));
        }
        match extra {
            Ok(note) if !note.is_empty() => summary.push_str(&format!("; {note}")),
            Ok(_) => {}
            Err(why) => {
                pass = false;
                summary.push_str(&format!("; {why}"));
            }
        }
        Verdict { pass, summary }
    }
}

fn matching<'a>(reports: &'a [Report], pattern: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
    reports.iter().flat_map(|r| r.checks.iter()).filter(move |c| c.id.contains(pattern))
}

fn yang_baxter_reports(runner: &Runner) -> Vec<Report> {
    (2..=4).map(|n| runner.run("yang-baxter", n, 1, seed(n, 0), "").1).collect()
}

/// rll suite for `N ∈ {2,3}`, `L ∈ 1..=5`, tagged with `L`.
fn rll_reports(runner: &Runner) -> Vec<(usize, Report)> {
    let mut out = Vec::new();
    for n in 2..=3 {
        for l in 1..=5 {
            out.push((l, runner.run("rll", n, l, seed(n, l), "").1));
        }
    }
    out
}

fn criterion_1(ybe: &[Report], rll: &[(usize, Report)]) -> Verdict {
    let short: Vec<Report> = rll.iter().filter(|(l, _)| *l <= 4).map(|(_, r)| r.clone()).collect();
    let ybe_checks: Vec<&CheckRecord> = matching(ybe, "/ybe/").collect();
    let per_rank =
        (2..=4).all(|n| ybe_checks.iter().filter(|c| c.id.starts_with(&format!("yang-baxter/n{n}/"))).count() >= 100);
    let extra = if per_rank { Ok(String::new()) } else { Err("fewer than 100 samples for some rank".into()) };
    Verdict::from_checks(ybe_checks.into_iter().chain(matching(&short, "/rll/")), extra)
}

fn criterion_2(ybe: &[Report]) -> Verdict {
    Verdict::from_checks(matching(ybe, "/equal-points/").chain(matching(ybe, "/classical-limit/")), Ok(String::new()))
}

fn criterion_3(rll: &[(usize, Report)]) -> Verdict {
    let all: Vec<Report> = rll.iter().map(|(_, r)| r.clone()).collect();
    let longest = rll.iter().any(|(l, r)| *l == 5 && r.chains[0].n == 3);
    let extra = if longest { Ok("up to N=3, L=5".into()) } else { Err("no L=5 run".into()) };
    Verdict::from_checks(matching(&all, "/transfer-commute/"), extra)
}

fn gauss_reports(runner: &Runner) -> Vec<Report> {
    let mut out = Vec::new();
    for n in 2..=4 {
        for l in 1..=3 {
            out.push(runner.run("gauss", n, l, seed(n, l), "").1);
        }
    }
    out
}

fn criterion_4(gauss: &[Report]) -> Verdict {
    let checks: Vec<&CheckRecord> =
        gauss.iter().flat_map(|r| r.checks.iter()).filter(|c| !c.id.contains("/zero-mode/")).collect();
    let anchors: BTreeSet<&str> = checks.iter().map(|c| c.anchor.as_str()).collect();
    let want = ["(2.6)", "(2.30)", "(3.4)", "(3.10)", "(4.19)", "(4.23)"];
    let missing: Vec<&str> = want.iter().filter(|a| !anchors.contains(*a)).cloned().collect();
    let extra = if missing.is_empty() { Ok(String::new()) } else { Err(format!("no checks for {missing:?}")) };
    Verdict::from_checks(checks, extra)
}

fn criterion_5(rll: &[(usize, Report)], gauss: &[Report]) -> Verdict {
    let all: Vec<Report> = rll.iter().map(|(_, r)| r.clone()).collect();
    let checks = matching(&all, "/vacuum/")
        .chain(matching(&all, "/zero-mode-triangular/"))
        .chain(matching(gauss, "/zero-mode/"));
    Verdict::from_checks(checks, Ok(String::new()))
}

fn criterion_6(runner: &Runner) -> Verdict {
    let (code, report, _) = runner.run("identities", 2, 2, 6, "");
    let anchors: BTreeSet<&str> = report.checks.iter().map(|c| c.anchor.as_str()).collect();
    let want = ["(3.25)", "(3.16)", "(3.17)", "(4.7)", "(4.8)", "(4.33)", "§4.3.2"];
    let missing: Vec<&str> = want.iter().filter(|a| !anchors.contains(*a)).cloned().collect();
    let decompositions = report.checks.iter().filter(|c| c.id.contains("/decomposition/")).count();
    let extra = if !missing.is_empty() {
        Err(format!("no checks for {missing:?}"))
    } else if decompositions != 14 {
        Err(format!("{decompositions} decomposition checks, expected every s for n ≤ 4"))
    } else if code != 0 {
        Err(format!("exit code {code}"))
    } else {
        Ok(String::new())
    };
    Verdict::from_checks(&report.checks, extra)
}

fn criterion_7(runner: &Runner) -> Verdict {
    let mut reports = Vec::new();
    let mut found = 0;
    let mut states = 0;
    let mut empty_sectors = Vec::new();
    for (n, max_l) in [(2, 4), (3, 3)] {
        for l in 1..=max_l {
            let (_, report, _) = runner.run("verify", n, l, seed(n, l), "");
            for s in &report.sectors {
                found += s.found;
                states += s.dimension;
                if s.found == 0 {
                    empty_sectors.push(format!("N={n} L={l} {:?}", s.sector));
                }
            }
            reports.push(report);
        }
    }
    let on_shell = matching(&reports, "/on-shell").count();
    let eigen = matching(&reports, "/eigenvalue").count();
    let extra = if !empty_sectors.is_empty() {
        Err(format!("solver found nothing in {empty_sectors:?}"))
    } else if on_shell != eigen || on_shell != found {
        Err(format!("{on_shell} on-shell and {eigen} eigenvalue checks for {found} solutions"))
    } else {
        Ok(format!("{found} solutions for {states} states"))
    };
    Verdict::from_checks(reports.iter().flat_map(|r| r.checks.iter()), extra)
}

fn offshell_reports(runner: &Runner) -> Vec<(usize, usize, Report)> {
    let mut out = Vec::new();
    for l in 1..=4 {
        out.push((2, l, runner.run("offshell", 2, l, seed(2, l), "").1));
    }
    for l in 1..=3 {
        out.push((3, l, runner.run("offshell", 3, l, seed(3, l), "").1));
    }
    out
}

fn criterion_8(off: &[(usize, usize, Report)]) -> Verdict {
    let reports: Vec<Report> = off.iter().map(|(_, _, r)| r.clone()).collect();
    Verdict::from_checks(matching(&reports, "/falsification"), Ok(String::new()))
}

fn criterion_9(off: &[(usize, usize, Report)]) -> Verdict {
    let reports: Vec<Report> = off.iter().filter(|(n, _, _)| *n == 2).map(|(_, _, r)| r.clone()).collect();
    let has =
        |l: usize, id: &str| off.iter().any(|(n, ll, r)| *n == 2 && *ll == l && r.checks.iter().any(|c| c.id == id));
    let mut problems = Vec::new();
    for (l, n) in [(1, 1), (2, 1), (3, 1), (3, 2), (4, 3)] {
        for kind in ["span", "closed-form/m1", "iff/m1"] {
            if !has(l, &format!("offshell/c00/unwanted/n{n}/off/{kind}")) {
                problems.push(format!("missing L={l} n={n} {kind}"));
            }
        }
    }
    for (l, n) in [(2, 2), (3, 3)] {
        if !has(l, &format!("offshell/c00/unwanted/n{n}/ill-posed")) {
            problems.push(format!("missing rank-deficiency check L={l} n={n}"));
        }
    }
    let on_shell = matching(&reports, "/on/").filter(|c| c.id.contains("/vanishes/")).count();
    if on_shell == 0 {
        problems.push("no on-shell coefficient checks".into());
    }
    let extra =
        if problems.is_empty() { Ok(format!("{on_shell} on-shell coefficients")) } else { Err(problems.join(", ")) };
    Verdict::from_checks(matching(&reports, "/unwanted/"), extra)
}

fn criterion_10(runner: &Runner) -> Verdict {
    let mut reports = Vec::new();
    for (n, l) in [(2, 2), (3, 2)] {
        reports.push(runner.run("spectrum", n, l, seed(n, l), "").1);
    }
    let complete = matching(&reports, "/complete").count();
    let extra =
        if complete == 2 { Ok("4 and 9 states".into()) } else { Err(format!("{complete} completeness checks")) };
    Verdict::from_checks(reports.iter().flat_map(|r| r.checks.iter()), extra)
}

/// Report text with every `wall_time` line removed.
fn without_timestamps(path: &Path) -> String {
    std::fs::read_to_string(path)
        .expect("read report")
        .lines()
        .filter(|line| !line.trim_start().starts_with("\"wall_time\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_11(runner: &Runner) -> Verdict {
    let mut compared = Vec::new();
    let mut problems = Vec::new();
    for (command, n, l) in [("all", 2, 2), ("verify", 3, 2)] {
        let (_, a, pa) = runner.run(command, n, l, 77, "");
        let (_, b, pb) = runner.run(command, n, l, 77, "");
        if without_timestamps(&pa) != without_timestamps(&pb) {
            problems.push(format!("{command} N={n} L={l} reports differ"));
        }
        if a.without_timings() != b.without_timings() {
            problems.push(format!("{command} N={n} L={l} parsed reports differ"));
        }
        compared.push(a);
    }
    let checks: usize = compared.iter().map(|r| r.checks.len()).sum();
    if checks == 0 {
        problems.push("reports contain no checks".into());
    }
    if problems.is_empty() {
        Verdict {
            pass: true,
            summary: format!("{} report pairs with {checks} checks identical apart from wall_time", compared.len()),
        }
    } else {
        Verdict { pass: false, summary: problems.join(", ") }
    }
}

fn main() {
    let runner = Runner::new();
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut record = |k: usize, name: &'static str, v: Verdict| {
        println!("criterion {k:>2} {name}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.summary);
        results.push((k, name, v));
    };

    let ybe = yang_baxter_reports(&runner);
    let rll = rll_reports(&runner);
    record(1, "yang-baxter and rll", criterion_1(&ybe, &rll));
    record(2, "r-matrix degenerations", criterion_2(&ybe));
    record(3, "transfer commutativity", criterion_3(&rll));
    let gauss = gauss_reports(&runner);
    record(4, "gauss coordinates", criterion_4(&gauss));
    record(5, "vacuum and zero modes", criterion_5(&rll, &gauss));
    record(6, "scalar identities", criterion_6(&runner));
    record(7, "bethe vectors are eigenvectors", criterion_7(&runner));
    let off = offshell_reports(&runner);
    record(8, "off-shell falsification", criterion_8(&off));
    record(9, "unwanted terms for N=2", criterion_9(&off));
    record(10, "spectrum reconciliation", criterion_10(&runner));
    record(11, "determinism", criterion_11(&runner));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
