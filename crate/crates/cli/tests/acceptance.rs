//! The twelve acceptance criteria. Runs `verify-all` twice, checks every criterion against
//! its own threshold from the recorded values, and prints one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use chernform_cli::scenario::TaskKind;
use chernform_cli::shipped_by_name;

#[derive(Debug)]
struct Row {
    value: f64,
    target: f64,
    tol: f64,
}

type Summary = BTreeMap<String, Row>;

fn verify_all(dir: &Path, jobs: &str) -> (bool, Duration) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_chernform"))
        .args(["verify-all", "--out-dir", dir.to_str().unwrap(), "--jobs", jobs])
        .status()
        .expect("binary runs");
    (status.success(), start.elapsed())
}

fn read_summary(dir: &Path) -> Summary {
    let mut r = csv::Reader::from_path(dir.join("summary.csv")).expect("summary.csv");
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            let f = |i: usize| rec[i].parse::<f64>().unwrap();
            (rec[0].to_string(), Row { value: f(2), target: f(3), tol: f(4) })
        })
        .collect()
}

struct Criterion {
    ok: bool,
    lines: Vec<String>,
}

impl Criterion {
    fn new() -> Criterion {
        Criterion { ok: true, lines: Vec::new() }
    }

    fn get<'a>(&mut self, s: &'a Summary, id: &str) -> Option<&'a Row> {
        let row = s.get(id);
        if row.is_none() {
            self.ok = false;
            self.lines.push(format!("missing {id}"));
        }
        row
    }

    fn at_most(&mut self, s: &Summary, id: &str, bound: f64) {
        if let Some(r) = self.get(s, id) {
            let ok = r.value <= bound;
            self.ok &= ok;
            self.lines.push(format!("{id} = {:.3e} (≤ {bound:.0e}){}", r.value, flag(ok)));
        }
    }

    fn near(&mut self, s: &Summary, id: &str, target: f64, tol: f64) {
        if let Some(r) = self.get(s, id) {
            let ok = (r.value - target).abs() <= tol;
            self.ok &= ok;
            self.lines.push(format!("{id} = {:.6} (target {target} ± {tol}){}", r.value, flag(ok)));
        }
    }

    fn within_own_bar(&mut self, s: &Summary, id: &str) {
        if let Some(r) = self.get(s, id) {
            let ok = (r.value - r.target).abs() <= r.tol;
            self.ok &= ok;
            self.lines.push(format!(
                "{id}: {:.6} vs {:.6}, combined bar {:.2e}{}",
                r.value,
                r.target,
                r.tol,
                flag(ok)
            ));
        }
    }

    fn at_least(&mut self, s: &Summary, id: &str, bound: f64, slack: f64) {
        if let Some(r) = self.get(s, id) {
            let ok = r.value >= bound - slack;
            self.ok &= ok;
            self.lines.push(format!("{id} = {:.6e} (≥ {bound} − {slack:.1e}){}", r.value, flag(ok)));
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        self.ok &= ok;
        self.lines.push(format!("{what}{}", flag(ok)));
    }

    fn note(&mut self, what: String) {
        self.lines.push(what);
    }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        ""
    } else {
        "  <-- out of tolerance"
    }
}

fn first_task(name: &str) -> TaskKind {
    shipped_by_name(name).unwrap().tasks[0].kind.clone()
}

const IDENTITIES: [&str; 7] = ["dv-b", "db", "da", "dbar-a", "b-a", "dw-a", "a-factored"];
const LAMBDA_IDENTITIES: [&str; 4] = ["lambda-r", "lambda-a", "lambda-cq", "lambda-delta"];
const MASS_CASES: [(&str, f64, f64); 6] = [
    ("line-bundle-pl/t1-mass.mass", 1.0, 0.01),
    ("line-z2/t1-mass.mass", 2.0, 0.01),
    ("line-z3/t1-mass.mass", 3.0, 0.01),
    ("point-c2/t1-mass.mass", 1.0, 0.01),
    ("point-c2-curved/t1-mass.mass", 1.0, 0.01),
    ("point-c2-squares/t1-mass.mass", 4.0, 0.02),
];

fn criteria(s: &Summary) -> Vec<(&'static str, Criterion)> {
    let mut out = Vec::new();

    let mut c = Criterion::new();
    let sized = matches!(first_task("berezin-det"), TaskKind::Berezin { count: 100, max_rank: 4, .. });
    c.require(sized, "100 matrices, ranks 1..4".into());
    c.at_most(s, "berezin-det/t1-berezin.det", 1e-12);
    out.push(("Berezin determinant", c));

    let mut c = Criterion::new();
    c.require(matches!(first_task("chern-random"), TaskKind::Chern { count: 50 }), "50 random metrics".into());
    c.at_most(s, "chern-random/t1-chern.chern-closed", 1e-9);
    c.at_most(s, "chern-random/t1-chern.bianchi", 1e-9);
    out.push(("Chern form closedness and Bianchi", c));

    let mut c = Criterion::new();
    c.near(s, "fs-line/t1-chern-number.integral", 1.0, 1e-4);
    c.near(s, "fs-plane/t1-fs-volume.volume", 1.0, 1e-3);
    for id in ["fs-line/t3-fs-chern.product", "fs-plane/t3-fs-chern.product", "fs-products/t1-fs-chern.product"] {
        c.at_most(s, id, 1e-10);
    }
    out.push(("Fubini–Study anchors", c));

    let mut c = Criterion::new();
    for scn in ["identities-rank2", "identities-rank3"] {
        let sized = matches!(first_task(scn), TaskKind::Identities { points: 100, .. });
        c.require(sized, format!("{scn}: 100 points"));
        c.at_most(s, &format!("{scn}/t1-identities.cq-routes"), 1e-9);
    }
    out.push(("quotient Chern form route agreement", c));

    let mut c = Criterion::new();
    for scn in ["identities-rank2", "identities-rank3"] {
        for name in IDENTITIES {
            c.at_most(s, &format!("{scn}/t1-identities.{name}"), 1e-9);
        }
        for name in LAMBDA_IDENTITIES {
            c.at_most(s, &format!("{scn}/t1-identities.{name}"), 1e-12);
        }
        for name in ["dv-b-printed", "b-a-printed"] {
            if let Some(r) = s.get(&format!("{scn}/t1-identities.{name}")) {
                c.note(format!("{scn}: literal sign {name}, smallest residual {:.3e}", r.value));
            }
        }
    }
    out.push(("transgression identities", c));

    let mut c = Criterion::new();
    for (id, k, rel) in MASS_CASES {
        c.near(s, id, k, rel * k);
    }
    for id in ["point-c2/t2-mass.mass", "point-c2-squares/t2-mass.mass"] {
        if let Some(r) = c.get(s, id) {
            let ok = r.value.abs() <= r.tol;
            c.require(ok, format!("{id} = {:.2e}, error bar {:.2e}", r.value, r.tol));
        }
    }
    out.push(("multiplicity recovery", c));

    let mut c = Criterion::new();
    for (id, _, _) in MASS_CASES {
        c.within_own_bar(s, &id.replace(".mass", ".mprecis"));
    }
    out.push(("mprecis route agreement", c));

    let mut c = Criterion::new();
    c.at_most(s, "line-bundle-pl/t2-green.residual", 0.02);
    c.at_most(s, "point-c2/t3-green.residual", 0.02);
    out.push(("Green current pairing", c));

    let mut c = Criterion::new();
    c.at_most(s, "point-c2/t4-meo.residual", 0.02);
    c.at_most(s, "meo-degenerate/t1-meo.residual", 0.02);
    out.push(("Meo pairing", c));

    let mut c = Criterion::new();
    let sized = matches!(
        &shipped_by_name("fs-products").unwrap().tasks[2].kind,
        TaskKind::Positivity { points: 50, trials: 200, forms, .. } if forms == &[1, 2]
    );
    c.require(sized, "50 points, 200 decomposables for c1 and c2".into());
    c.at_least(s, "fs-products/t3-positivity.bott-chern", 0.0, 1e-10);
    c.at_least(s, "fs-products/t3-positivity.c1-positive", 0.0, 1e-10);
    c.at_least(s, "fs-products/t3-positivity.c2-positive", 0.0, 1e-10);
    for (id, _, _) in MASS_CASES {
        let nid = id.replace(".mass", ".nonneg");
        if let Some(r) = c.get(s, &nid) {
            let ok = r.value >= -r.tol;
            c.require(ok, format!("{nid} = {:.6} ≥ −{:.1e}", r.value, r.tol));
        }
    }
    out.push(("positivity", c));

    let mut c = Criterion::new();
    c.near(s, "bezout-p1-cubic/t1-bezout.total", 3.0, 0.03);
    c.near(s, "bezout-p2-deg6/t1-bezout.affine", 6.0, 0.12);
    c.near(s, "bezout-p2-deg6/t1-bezout.infinity", 0.0, 0.01);
    c.near(s, "bezout-p1-infinity/t1-bezout.affine", 0.0, 1e-9);
    c.near(s, "bezout-p1-infinity/t1-bezout.infinity", 2.0, 0.04);
    for scn in ["bezout-p1-cubic", "bezout-p2-deg6", "bezout-p1-infinity"] {
        c.within_bound(s, &format!("{scn}/t1-bezout.bound"));
    }
    out.push(("Bezout", c));

    out
}

impl Criterion {
    fn within_bound(&mut self, s: &Summary, id: &str) {
        if let Some(r) = self.get(s, id) {
            let ok = r.value <= r.target + r.tol;
            self.ok &= ok;
            self.lines.push(format!("{id}: {:.6} ≤ {} + {:.1e}{}", r.value, r.target, r.tol, flag(ok)));
        }
    }
}

fn main() -> ExitCode {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ok_a, t_a) = verify_all(a.path(), "1");
    let (ok_b, t_b) = verify_all(b.path(), "2");
    let summary = read_summary(a.path());

    let mut stdout = std::io::stdout().lock();
    let mut all = true;
    for (i, (name, c)) in criteria(&summary).into_iter().enumerate() {
        all &= c.ok;
        let _ = writeln!(stdout, "criterion {:>2} {}: {}", i + 1, name, if c.ok { "PASS" } else { "FAIL" });
        for l in c.lines {
            let _ = writeln!(stdout, "    {l}");
        }
    }

    let same = |f: &str| std::fs::read(a.path().join(f)).unwrap() == std::fs::read(b.path().join(f)).unwrap();
    let det = same("summary.csv") && same("samples.csv");
    let budget = t_a + t_b < Duration::from_secs(30 * 60);
    let ok12 = det && budget;
    all &= ok12;
    let _ = writeln!(
        stdout,
        "criterion 12 determinism: {}",
        if ok12 { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(
        stdout,
        "    verify-all with 1 and 2 workers: {:.0} s and {:.0} s, identical summary.csv and samples.csv: {det}",
        t_a.as_secs_f64(),
        t_b.as_secs_f64()
    );
    let _ = writeln!(stdout, "    verify-all exit status: {ok_a} / {ok_b}");
    all &= ok_a && ok_b;

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
