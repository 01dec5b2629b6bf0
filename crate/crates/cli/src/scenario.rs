//! Scenario files: `[section]` headers followed by `key = value` lines.
//!
//! Lists of numbers are separated by whitespace or commas, lists of expressions by `;`,
//! points inside a list by `,`. `#` starts a comment.

use std::fmt::{self, Write as _};

use chernform::currents::{Grid, TGrading, DEFAULT_LAMBDAS};
use chernform::positivity::Mode;
use chernform::{Error, Expr, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub anchor: String,
    pub n: usize,
    pub seed: u64,
    pub metric: MetricSpec,
    pub section: SectionSpec,
    pub numerics: Numerics,
    pub tasks: Vec<Task>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricSpec {
    Trivial { rank: usize },
    Fs { degrees: Vec<u32> },
    Diag(Vec<Expr>),
    /// Upper triangle, row-major.
    Hermitian { rank: usize, upper: Vec<Expr> },
    Random { rank: usize, degree: u32, scale: f64 },
}

impl MetricSpec {
    pub fn rank(&self) -> usize {
        match self {
            MetricSpec::Trivial { rank } | MetricSpec::Hermitian { rank, .. } | MetricSpec::Random { rank, .. } => {
                *rank
            }
            MetricSpec::Fs { degrees } => degrees.len(),
            MetricSpec::Diag(d) => d.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SectionSpec {
    None,
    Entries(Vec<Expr>),
    Random { degree: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Numerics {
    pub jet_order: usize,
    pub grid: Grid,
    pub lambdas: Vec<f64>,
    pub bump_radius: f64,
    pub bump_order: u32,
}

impl Default for Numerics {
    fn default() -> Numerics {
        Numerics {
            jet_order: 4,
            grid: Grid::default(),
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            bump_radius: 1.0,
            bump_order: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    pub kind: TaskKind,
    /// Overrides the default anchor of the task's checks.
    pub anchor: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroComponent {
    Point(Vec<Expr>),
    /// `{z_axis = value}`, axis counted from 1 as in the file.
    Hyperplane { axis: usize, value: Expr },
}

#[derive(Clone, Debug, PartialEq)]
pub enum TaskKind {
    Berezin { count: usize, max_rank: usize, tol: f64 },
    Chern { count: usize },
    Identities { points: usize, delta: f64, lambdas: Vec<f64> },
    FsVolume { target: f64, tol: f64 },
    ChernNumber { target: f64, tol: f64 },
    FsChern { points: usize },
    Positivity { points: usize, trials: usize, mode: Mode, forms: Vec<usize> },
    Mass { k: usize, p: usize, target: f64, tol: f64, mprecis: bool, grading: TGrading },
    Green { k: usize, tol: f64, grading: TGrading },
    Meo { p: usize, components: Vec<(ZeroComponent, f64)>, tol: f64, grading: TGrading },
    Bezout {
        zeros: Vec<Vec<Expr>>,
        affine: Option<(f64, f64)>,
        infinity: Option<(f64, f64)>,
        total: Option<(f64, f64)>,
        ball_radius: f64,
        chart_radius: f64,
    },
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Berezin { .. } => "berezin",
            TaskKind::Chern { .. } => "chern",
            TaskKind::Identities { .. } => "identities",
            TaskKind::FsVolume { .. } => "fs-volume",
            TaskKind::ChernNumber { .. } => "chern-number",
            TaskKind::FsChern { .. } => "fs-chern",
            TaskKind::Positivity { .. } => "positivity",
            TaskKind::Mass { .. } => "mass",
            TaskKind::Green { .. } => "green",
            TaskKind::Meo { .. } => "meo",
            TaskKind::Bezout { .. } => "bezout",
        }
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    /// 1-based column of the first character of `value`.
    column: usize,
    used: bool,
}

struct Block {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

fn split_blocks(src: &str) -> Result<Vec<Block>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = text.chars().take_while(|c| c.is_whitespace()).count() + 1;
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') {
                return Err(parse_error(line, indent, "unterminated section header"));
            }
            blocks.push(Block {
                name: trimmed[1..trimmed.len() - 1].trim().to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = text.find('=') else {
            return Err(parse_error(line, indent, "expected `key = value`"));
        };
        let key = text[..eq].trim().to_string();
        if key.is_empty() {
            return Err(parse_error(line, indent, "missing key"));
        }
        let rest = &text[eq + 1..];
        let lead = rest.chars().take_while(|c| c.is_whitespace()).count();
        let column = text[..eq].chars().count() + 2 + lead;
        let Some(block) = blocks.last_mut() else {
            return Err(parse_error(line, indent, "entry before the first section header"));
        };
        block.entries.push(Entry {
            key,
            value: rest.trim().to_string(),
            line,
            column,
            used: false,
        });
    }
    Ok(blocks)
}

impl Block {
    fn take(&mut self, key: &str) -> Option<&mut Entry> {
        let e = self.entries.iter_mut().find(|e| e.key == key && !e.used)?;
        e.used = true;
        Some(e)
    }

    fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key && !e.used)
    }

    fn required(&mut self, key: &str) -> Result<(String, usize, usize)> {
        let line = self.line;
        let name = self.name.clone();
        match self.take(key) {
            Some(e) => Ok((e.value.clone(), e.line, e.column)),
            None => Err(parse_error(line, 1, format!("[{name}] is missing `{key}`"))),
        }
    }

    fn optional(&mut self, key: &str) -> Option<(String, usize, usize)> {
        self.take(key).map(|e| (e.value.clone(), e.line, e.column))
    }

    fn value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (v, line, col) = self.required(key)?;
        v.parse().map_err(|_| parse_error(line, col, format!("bad value for `{key}`: {v}")))
    }

    fn value_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        if self.has(key) {
            self.value(key)
        } else {
            Ok(default)
        }
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let (v, line, col) = self.required(key)?;
        number_list(&v, line, col)
    }

    fn exprs(&mut self, key: &str) -> Result<Vec<Expr>> {
        let (v, line, col) = self.required(key)?;
        expr_list(&v, line, col, ';')
    }

    fn finish(&self) -> Result<()> {
        match self.entries.iter().find(|e| !e.used) {
            Some(e) => Err(parse_error(
                e.line,
                1,
                format!("unknown or repeated key `{}` in [{}]", e.key, self.name),
            )),
            None => Ok(()),
        }
    }
}

fn number_list<T: std::str::FromStr>(v: &str, line: usize, col: usize) -> Result<Vec<T>> {
    v.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| parse_error(line, col, format!("bad number `{s}`")))
        })
        .collect()
}

fn expr_at(src: &str, line: usize, col: usize) -> Result<Expr> {
    let lead = src.chars().take_while(|c| c.is_whitespace()).count();
    Expr::parse(src).map_err(|e| match e {
        Error::Parse { column, message, .. } => parse_error(line, col + column - 1, message),
        other => parse_error(line, col + lead, other.to_string()),
    })
}

/// Splits on `sep`, tracking the column of each piece.
fn pieces(v: &str, col: usize, sep: char) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut start_col = col;
    let mut c = col;
    for (i, ch) in v.char_indices() {
        if ch == sep {
            out.push((&v[start..i], start_col));
            start = i + ch.len_utf8();
            start_col = c + 1;
        }
        c += 1;
    }
    out.push((&v[start..], start_col));
    out
}

fn expr_list(v: &str, line: usize, col: usize, sep: char) -> Result<Vec<Expr>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    pieces(v, col, sep)
        .into_iter()
        .map(|(s, c)| expr_at(s, line, c))
        .collect()
}

fn grading_from(s: &str, line: usize, col: usize) -> Result<TGrading> {
    match s {
        "smooth" => Ok(TGrading::Smooth),
        "zero" => Ok(TGrading::TowardZero),
        "one" => Ok(TGrading::TowardOne),
        "both" => Ok(TGrading::Both),
        _ => Err(parse_error(line, col, format!("unknown grading `{s}`"))),
    }
}

fn grading_name(g: TGrading) -> &'static str {
    match g {
        TGrading::Smooth => "smooth",
        TGrading::TowardZero => "zero",
        TGrading::TowardOne => "one",
        TGrading::Both => "both",
    }
}

fn grading(b: &mut Block) -> Result<TGrading> {
    match b.optional("grading") {
        Some((v, line, col)) => grading_from(&v, line, col),
        None => Ok(TGrading::Smooth),
    }
}

fn target(b: &mut Block, key: &str) -> Result<Option<(f64, f64)>> {
    if !b.has(key) {
        return Ok(None);
    }
    let t = b.value(key)?;
    let tol = b.value(&format!("{key}_tol"))?;
    Ok(Some((t, tol)))
}

fn component(v: &str, line: usize, col: usize) -> Result<(ZeroComponent, f64)> {
    let (body, mult) = match v.rfind('|') {
        Some(i) => {
            let m = v[i + 1..].trim();
            let m = m
                .parse()
                .map_err(|_| parse_error(line, col + i + 1, format!("bad multiplicity `{m}`")))?;
            (&v[..i], m)
        }
        None => (v, 1.0),
    };
    let Some((kind, rest)) = body.split_once(':') else {
        return Err(parse_error(line, col, "expected `point: ...` or `hyperplane zk: ...`"));
    };
    let rest_col = col + kind.chars().count() + 1;
    let kind = kind.trim();
    if kind == "point" {
        return Ok((ZeroComponent::Point(expr_list(rest, line, rest_col, ',')?), mult));
    }
    if let Some(axis) = kind.strip_prefix("hyperplane") {
        let axis = axis.trim();
        let idx: usize = axis
            .strip_prefix('z')
            .and_then(|s| s.parse().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(|| parse_error(line, col, format!("bad hyperplane axis `{axis}`")))?;
        let value = expr_at(rest, line, rest_col)?;
        return Ok((ZeroComponent::Hyperplane { axis: idx, value }, mult));
    }
    Err(parse_error(line, col, format!("unknown component kind `{kind}`")))
}

fn positive(v: usize, what: &str, line: usize) -> Result<usize> {
    if v == 0 {
        return Err(parse_error(line, 1, format!("{what} must be positive")));
    }
    Ok(v)
}

fn parse_metric(b: &mut Block, n: usize) -> Result<MetricSpec> {
    let (preset, line, col) = b.required("preset")?;
    let spec = match preset.as_str() {
        "trivial" => MetricSpec::Trivial { rank: positive(b.value("rank")?, "rank", line)? },
        "fs" => {
            let degrees: Vec<u32> = b.list("degrees")?;
            if degrees.is_empty() || degrees.contains(&0) {
                return Err(parse_error(line, 1, "fs degrees must be positive"));
            }
            MetricSpec::Fs { degrees }
        }
        "diag" => {
            let d = b.exprs("entries")?;
            if d.is_empty() {
                return Err(parse_error(line, 1, "empty diagonal"));
            }
            MetricSpec::Diag(d)
        }
        "hermitian" => {
            let rank = positive(b.value("rank")?, "rank", line)?;
            let upper = b.exprs("upper")?;
            if upper.len() != rank * (rank + 1) / 2 {
                return Err(parse_error(
                    line,
                    1,
                    format!("rank {rank} needs {} upper entries, got {}", rank * (rank + 1) / 2, upper.len()),
                ));
            }
            MetricSpec::Hermitian { rank, upper }
        }
        "random" => MetricSpec::Random {
            rank: positive(b.value("rank")?, "rank", line)?,
            degree: b.value("degree")?,
            scale: b.value("scale")?,
        },
        other => return Err(parse_error(line, col, format!("unknown metric preset `{other}`"))),
    };
    let too_wide = |e: &Expr| e.dim() > n;
    let bad = match &spec {
        MetricSpec::Diag(d) => d.iter().any(too_wide),
        MetricSpec::Hermitian { upper, .. } => upper.iter().any(too_wide),
        _ => false,
    };
    if bad {
        return Err(parse_error(line, 1, format!("metric uses a variable beyond z{n}")));
    }
    Ok(spec)
}

fn parse_section(b: &mut Block, n: usize) -> Result<SectionSpec> {
    if b.has("random_degree") {
        return Ok(SectionSpec::Random { degree: b.value("random_degree")? });
    }
    let (v, line, col) = b.required("entries")?;
    let entries = expr_list(&v, line, col, ';')?;
    if entries.is_empty() {
        return Err(parse_error(line, col, "section needs at least one entry"));
    }
    if entries.iter().any(|e| e.dim() > n) {
        return Err(parse_error(line, col, format!("section uses a variable beyond z{n}")));
    }
    if let Some(j) = entries.iter().position(|e| !e.is_syntactically_holomorphic()) {
        return Err(parse_error(line, col, format!("section entry {} is not holomorphic", j + 1)));
    }
    Ok(SectionSpec::Entries(entries))
}

fn parse_numerics(b: &mut Block) -> Result<Numerics> {
    let d = Numerics::default();
    let jet_order = b.value_or("jet_order", d.jet_order)?;
    let grid = match b.optional("grid") {
        Some((v, line, col)) => {
            let g: Vec<usize> = number_list(&v, line, col)?;
            if g.len() != 3 || g.contains(&0) {
                return Err(parse_error(line, col, "grid needs three positive sizes: radial t theta"));
            }
            Grid { radial: g[0], t: g[1], theta: g[2] }
        }
        None => d.grid,
    };
    let lambdas = match b.optional("lambdas") {
        Some((v, line, col)) => {
            let l: Vec<f64> = number_list(&v, line, col)?;
            if l.len() < 3 || l.iter().any(|&x| !(x > 0.0)) {
                return Err(parse_error(line, col, "need at least three positive λ values"));
            }
            l
        }
        None => d.lambdas,
    };
    Ok(Numerics {
        jet_order,
        grid,
        lambdas,
        bump_radius: b.value_or("bump_radius", d.bump_radius)?,
        bump_order: b.value_or("bump_order", d.bump_order)?,
    })
}

fn parse_mode(v: &str, line: usize, col: usize) -> Result<Mode> {
    match v {
        "bott-chern" => Ok(Mode::BottChern),
        "nakano" => Ok(Mode::Nakano),
        _ => Err(parse_error(line, col, format!("unknown positivity mode `{v}`"))),
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::BottChern => "bott-chern",
        Mode::Nakano => "nakano",
    }
}

fn parse_task(b: &mut Block, rank: usize) -> Result<Task> {
    let (kind, line, col) = b.required("kind")?;
    let anchor = b.optional("anchor").map(|(v, _, _)| v);
    let kind = match kind.as_str() {
        "berezin" => TaskKind::Berezin {
            count: b.value("count")?,
            max_rank: positive(b.value("max_rank")?, "max_rank", line)?,
            tol: b.value("tol")?,
        },
        "chern" => TaskKind::Chern { count: b.value("count")? },
        "identities" => TaskKind::Identities {
            points: b.value("points")?,
            delta: b.value_or("delta", 0.1)?,
            lambdas: if b.has("lambdas") { b.list("lambdas")? } else { vec![0.5, 1.0, 2.0] },
        },
        "fs-volume" => TaskKind::FsVolume { target: b.value("target")?, tol: b.value("tol")? },
        "chern-number" => TaskKind::ChernNumber { target: b.value("target")?, tol: b.value("tol")? },
        "fs-chern" => TaskKind::FsChern { points: b.value("points")? },
        "positivity" => {
            let mode = match b.optional("mode") {
                Some((v, l, c)) => parse_mode(&v, l, c)?,
                None => Mode::BottChern,
            };
            TaskKind::Positivity {
                points: b.value("points")?,
                trials: b.value("trials")?,
                mode,
                forms: if b.has("forms") { b.list("forms")? } else { Vec::new() },
            }
        }
        "mass" => {
            let k = positive(b.value("k")?, "k", line)?;
            TaskKind::Mass {
                k,
                p: b.value_or("p", rank)?,
                target: b.value("target")?,
                tol: b.value("tol")?,
                mprecis: b.value_or("mprecis", false)?,
                grading: grading(b)?,
            }
        }
        "green" => TaskKind::Green {
            k: positive(b.value("k")?, "k", line)?,
            tol: b.value("tol")?,
            grading: grading(b)?,
        },
        "meo" => {
            let p = positive(b.value("p")?, "p", line)?;
            let mut components = Vec::new();
            while let Some((v, l, c)) = b.optional("component") {
                components.push(component(&v, l, c)?);
            }
            TaskKind::Meo { p, components, tol: b.value("tol")?, grading: grading(b)? }
        }
        "bezout" => {
            let mut zeros = Vec::new();
            if let Some((v, l, c)) = b.optional("zeros") {
                for (piece, pc) in pieces(&v, c, ';') {
                    if piece.trim().is_empty() {
                        continue;
                    }
                    zeros.push(expr_list(piece, l, pc, ',')?);
                }
            }
            TaskKind::Bezout {
                zeros,
                affine: target(b, "affine")?,
                infinity: target(b, "infinity")?,
                total: target(b, "total")?,
                ball_radius: b.value_or("ball_radius", 0.5)?,
                chart_radius: b.value_or("chart_radius", 64.0)?,
            }
        }
        other => return Err(parse_error(line, col, format!("unknown task kind `{other}`"))),
    };
    Ok(Task { kind, anchor })
}

pub fn parse(src: &str) -> Result<Scenario> {
    let mut blocks = split_blocks(src)?;
    let mut find = |name: &str| -> Result<Block> {
        let i = blocks
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| parse_error(1, 1, format!("missing [{name}] section")))?;
        Ok(blocks.remove(i))
    };
    let mut head = find("scenario")?;
    let name: String = head.value("name")?;
    let anchor: String = head.value("anchor")?;
    let n: usize = head.value("n")?;
    if n == 0 {
        return Err(parse_error(head.line, 1, "dimension n must be positive"));
    }
    let seed_missing_line = head.line;
    let seed: Option<u64> = if head.has("seed") { Some(head.value("seed")?) } else { None };
    head.finish()?;

    let mut mb = find("metric")?;
    let metric = parse_metric(&mut mb, n)?;
    mb.finish()?;

    let section = match blocks.iter().position(|b| b.name == "section") {
        Some(i) => {
            let mut sb = blocks.remove(i);
            let s = parse_section(&mut sb, n)?;
            sb.finish()?;
            s
        }
        None => SectionSpec::None,
    };
    if let SectionSpec::Entries(e) = &section {
        if e.len() != metric.rank() {
            return Err(parse_error(
                1,
                1,
                format!("section has {} entries but the metric has rank {}", e.len(), metric.rank()),
            ));
        }
    }

    let numerics = match blocks.iter().position(|b| b.name == "numerics") {
        Some(i) => {
            let mut nb = blocks.remove(i);
            let num = parse_numerics(&mut nb)?;
            nb.finish()?;
            num
        }
        None => Numerics::default(),
    };

    let mut tasks = Vec::new();
    for mut b in blocks {
        if b.name != "task" {
            return Err(parse_error(b.line, 1, format!("unknown section [{}]", b.name)));
        }
        tasks.push(parse_task(&mut b, metric.rank())?);
        b.finish()?;
    }
    if tasks.is_empty() {
        return Err(parse_error(1, 1, "scenario has no [task]"));
    }
    let randomized = matches!(metric, MetricSpec::Random { .. })
        || matches!(section, SectionSpec::Random { .. })
        || tasks.iter().any(|t| {
            matches!(
                t.kind,
                TaskKind::Berezin { .. }
                    | TaskKind::Chern { .. }
                    | TaskKind::Identities { .. }
                    | TaskKind::FsChern { .. }
                    | TaskKind::Positivity { .. }
            )
        });
    let seed = match seed {
        Some(s) => s,
        None if randomized => return Err(parse_error(seed_missing_line, 1, "randomized scenario needs a seed")),
        None => 0,
    };
    Ok(Scenario { name, anchor, n, seed, metric, section, numerics, tasks })
}

fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn fmt_point(p: &[Expr]) -> String {
    join(p, ", ")
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[scenario]")?;
        writeln!(f, "name = {}", self.name)?;
        writeln!(f, "anchor = {}", self.anchor)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "\n[metric]")?;
        match &self.metric {
            MetricSpec::Trivial { rank } => writeln!(f, "preset = trivial\nrank = {rank}")?,
            MetricSpec::Fs { degrees } => writeln!(f, "preset = fs\ndegrees = {}", join(degrees, " "))?,
            MetricSpec::Diag(d) => writeln!(f, "preset = diag\nentries = {}", join(d, " ; "))?,
            MetricSpec::Hermitian { rank, upper } => {
                writeln!(f, "preset = hermitian\nrank = {rank}\nupper = {}", join(upper, " ; "))?
            }
            MetricSpec::Random { rank, degree, scale } => {
                writeln!(f, "preset = random\nrank = {rank}\ndegree = {degree}\nscale = {scale}")?
            }
        }
        match &self.section {
            SectionSpec::None => {}
            SectionSpec::Entries(e) => writeln!(f, "\n[section]\nentries = {}", join(e, " ; "))?,
            SectionSpec::Random { degree } => writeln!(f, "\n[section]\nrandom_degree = {degree}")?,
        }
        let nm = &self.numerics;
        writeln!(f, "\n[numerics]")?;
        writeln!(f, "jet_order = {}", nm.jet_order)?;
        writeln!(f, "grid = {} {} {}", nm.grid.radial, nm.grid.t, nm.grid.theta)?;
        writeln!(f, "lambdas = {}", join(&nm.lambdas, " "))?;
        writeln!(f, "bump_radius = {}", nm.bump_radius)?;
        writeln!(f, "bump_order = {}", nm.bump_order)?;
        for t in &self.tasks {
            writeln!(f, "\n[task]")?;
            writeln!(f, "kind = {}", t.kind.name())?;
            if let Some(a) = &t.anchor {
                writeln!(f, "anchor = {a}")?;
            }
            let mut s = String::new();
            match &t.kind {
                TaskKind::Berezin { count, max_rank, tol } => {
                    let _ = write!(s, "count = {count}\nmax_rank = {max_rank}\ntol = {tol:e}");
                }
                TaskKind::Chern { count } => {
                    let _ = write!(s, "count = {count}");
                }
                TaskKind::Identities { points, delta, lambdas } => {
                    let _ = write!(s, "points = {points}\ndelta = {delta}\nlambdas = {}", join(lambdas, " "));
                }
                TaskKind::FsVolume { target, tol } | TaskKind::ChernNumber { target, tol } => {
                    let _ = write!(s, "target = {target}\ntol = {tol:e}");
                }
                TaskKind::FsChern { points } => {
                    let _ = write!(s, "points = {points}");
                }
                TaskKind::Positivity { points, trials, mode, forms } => {
                    let _ = write!(s, "points = {points}\ntrials = {trials}\nmode = {}", mode_name(*mode));
                    if !forms.is_empty() {
                        let _ = write!(s, "\nforms = {}", join(forms, " "));
                    }
                }
                TaskKind::Mass { k, p, target, tol, mprecis, grading } => {
                    let _ = write!(
                        s,
                        "k = {k}\np = {p}\ntarget = {target}\ntol = {tol:e}\nmprecis = {mprecis}\ngrading = {}",
                        grading_name(*grading)
                    );
                }
                TaskKind::Green { k, tol, grading } => {
                    let _ = write!(s, "k = {k}\ntol = {tol:e}\ngrading = {}", grading_name(*grading));
                }
                TaskKind::Meo { p, components, tol, grading } => {
                    let _ = write!(s, "p = {p}");
                    for (c, mult) in components {
                        let _ = match c {
                            ZeroComponent::Point(pt) => write!(s, "\ncomponent = point: {} | {mult}", fmt_point(pt)),
                            ZeroComponent::Hyperplane { axis, value } => {
                                write!(s, "\ncomponent = hyperplane z{axis}: {value} | {mult}")
                            }
                        };
                    }
                    let _ = write!(s, "\ntol = {tol:e}\ngrading = {}", grading_name(*grading));
                }
                TaskKind::Bezout { zeros, affine, infinity, total, ball_radius, chart_radius } => {
                    let z: Vec<String> = zeros.iter().map(|p| fmt_point(p)).collect();
                    let _ = write!(s, "zeros = {}", z.join(" ; "));
                    for (key, t) in [("affine", affine), ("infinity", infinity), ("total", total)] {
                        if let Some((v, tol)) = t {
                            let _ = write!(s, "\n{key} = {v}\n{key}_tol = {tol:e}");
                        }
                    }
                    let _ = write!(s, "\nball_radius = {ball_radius}\nchart_radius = {chart_radius}");
                }
            }
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# a comment
[scenario]
name = demo
anchor = classical Poincaré–Lelong
n = 2
seed = 5

[metric]
preset = diag
entries = exp(-z1*zb1) ; 1 + z2*zb2

[section]
entries = z1*z2 ; z1^2

[numerics]
grid = 4, 6, 4

[task]
kind = meo
p = 1
component = hyperplane z1: 0 | 1
tol = 0.02
grading = one

[task]
kind = bezout
zeros = 1, exp(2*pi*i/3) ; -1, 1
affine = 6
affine_tol = 0.12
";

    #[test]
    fn parses_and_round_trips() {
        let s = parse(SAMPLE).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.numerics.grid, Grid { radial: 4, t: 6, theta: 4 });
        match &s.tasks[0].kind {
            TaskKind::Meo { components, .. } => {
                assert_eq!(components.len(), 1);
                assert!(matches!(components[0].0, ZeroComponent::Hyperplane { axis: 1, .. }));
            }
            other => panic!("{other:?}"),
        }
        match &s.tasks[1].kind {
            TaskKind::Bezout { zeros, affine, infinity, .. } => {
                assert_eq!(zeros.len(), 2);
                assert_eq!(*affine, Some((6.0, 0.12)));
                assert_eq!(*infinity, None);
                let w = zeros[0][1].eval(&[]).unwrap();
                assert!((w.arg() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let again = parse(&s.to_string()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn reports_locations() {
        let bad = SAMPLE.replace("exp(-z1*zb1)", "exp(-z1*)");
        match parse(&bad) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 10);
                assert!(column > 10, "{column}");
            }
            other => panic!("{other:?}"),
        }
        let bad = SAMPLE.replace("preset = diag", "preset = nope");
        assert!(matches!(parse(&bad), Err(Error::Parse { line: 9, column: 10, .. })));
        let bad = SAMPLE.replace("p = 1", "p = 1\nq = 2");
        assert!(matches!(parse(&bad), Err(Error::Parse { line: 21, .. })));
    }

    #[test]
    fn randomized_scenarios_need_a_seed() {
        let src = "[scenario]\nname=x\nanchor=y\nn=1\n[metric]\npreset=random\nrank=1\ndegree=1\nscale=0.5\n[task]\nkind=chern\ncount=2\n";
        assert!(matches!(parse(src), Err(Error::Parse { line: 1, .. })));
        assert!(parse(&src.replace("n=1", "n=1\nseed=3")).is_ok());
    }
}
