//! report.txt, samples.csv and summary.csv.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::run::{Outcome, Relation, Status};
use crate::CliError;

pub const CONVENTIONS: &str = "\
conventions
  ℵ = i/2π
  d^c = (∂ − ∂̄)/(2πi), so dd^c = 2ℵ∂∂̄ and dd^c log|z| = [0] in C
  ⟨ξ, η⟩ = η†Gξ, θ = G⁻¹∂G, Θ = ∂̄θ, c(D) = det(ℵΘ + I)
  Berezin integral ∫_e: coefficient of e₁∧e₁*∧⋯∧e_m∧e_m*, so ∫_e Ĩ^m/m! = 1
  masses are pairings with χβ^{n−k}, β = dd^c|z|², χ a radial bump with χ(center) = 1
";

fn num(x: f64) -> String {
    format!("{x:.9e}")
}

fn relation(r: Relation) -> &'static str {
    match r {
        Relation::Near => "±",
        Relation::AtLeast => "≥",
        Relation::AtMost => "≤",
        Relation::Info => "",
    }
}

pub fn render_report(outcomes: &[Outcome]) -> String {
    let mut s = String::from("chernform verification report\n\n");
    s.push_str(CONVENTIONS);
    let (mut pass, mut fail) = (0, 0);
    for o in outcomes {
        let _ = writeln!(s, "\nscenario {}: {}", o.scenario, o.anchor);
        for c in &o.checks {
            let status = c.status();
            match status {
                Status::Pass => pass += 1,
                Status::Fail => fail += 1,
                Status::Info => {}
            }
            if status == Status::Info {
                let _ = writeln!(s, "  {status}  {}  [{}]  {}", c.id, c.paper_ref, num(c.value));
            } else {
                let _ = writeln!(
                    s,
                    "  {status}  {}  [{}]  value {}  target {} {} {}",
                    c.id,
                    c.paper_ref,
                    num(c.value),
                    num(c.target),
                    relation(c.relation),
                    num(c.tol)
                );
            }
        }
        for note in &o.notes {
            let _ = writeln!(s, "  note  {note}");
        }
    }
    let _ = writeln!(s, "\n{pass} passed, {fail} failed");
    s
}

pub fn samples_csv(outcomes: &[Outcome]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "k", "lambda", "value_re", "value_im", "quad_err", "nodes"])?;
    for o in outcomes {
        for r in &o.samples {
            w.write_record([
                r.scenario.clone(),
                r.k.to_string(),
                r.lambda.to_string(),
                num(r.value.re),
                num(r.value.im),
                num(r.quad_err),
                r.nodes.to_string(),
            ])?;
        }
    }
    finish(w)
}

pub fn summary_csv(outcomes: &[Outcome]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check_id", "paper_ref", "value", "target", "tol", "status"])?;
    for o in outcomes {
        for c in &o.checks {
            w.write_record([
                c.id.clone(),
                c.paper_ref.clone(),
                num(c.value),
                num(c.target),
                num(c.tol),
                c.status().to_string(),
            ])?;
        }
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_all(dir: &Path, outcomes: &[Outcome]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.txt"), render_report(outcomes))?;
    fs::write(dir.join("samples.csv"), samples_csv(outcomes)?)?;
    fs::write(dir.join("summary.csv"), summary_csv(outcomes)?)?;
    Ok(())
}
