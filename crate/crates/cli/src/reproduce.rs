//! Replays the tabulated unions and diffs them against transcribed values.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use ttdesign::designs::strength;
use ttdesign::groups::{FiniteMatrixGroup, GroupSpec, build_group};
use ttdesign::numerics::{Rational, format_rational, parse_rational};
use ttdesign::orbits::{LineSet, orbit_lines};
use ttdesign::unions::{SolutionKind, UnionSolution, check_double_root, solve_union};

use crate::{CliError, CliResult, Config, range_label, resolve_seed};

pub const EXPECTATIONS: &str = include_str!("../data/expectations.csv");

pub const TABLE_IDS: [&str; 5] = ["a", "b", "d", "c2", "h"];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Expectation {
    pub table: String,
    pub group: String,
    pub seed_x: String,
    #[serde(default)]
    pub seed_y: String,
    pub t: u32,
    #[serde(default)]
    pub beta_x: String,
    #[serde(default)]
    pub beta_y: String,
    #[serde(default)]
    pub what_x: String,
    #[serde(default)]
    pub what_y: String,
    /// `lo-hi`, a single order, or `{}` for "no weighting".
    pub strength: String,
}

impl Expectation {
    pub fn is_single(&self) -> bool {
        self.seed_y.trim().is_empty()
    }

    pub fn expects_root(&self) -> bool {
        !self.beta_x.trim().is_empty()
    }

    pub fn label(&self) -> String {
        if self.is_single() {
            format!("{} {}", self.group, self.seed_x)
        } else {
            format!("{} {}+{}", self.group, self.seed_x, self.seed_y)
        }
    }
}

pub fn expectations() -> CliResult<Vec<Expectation>> {
    let mut rdr = csv::Reader::from_reader(EXPECTATIONS.as_bytes());
    rdr.deserialize()
        .map(|r| r.map_err(|e| CliError::Usage(format!("expectations file: {e}"))))
        .collect()
}

pub fn select(table: &str) -> CliResult<Vec<Expectation>> {
    let all = expectations()?;
    if table == "all" {
        return Ok(all);
    }
    if !TABLE_IDS.contains(&table) {
        return Err(CliError::Usage(format!(
            "unknown table id `{table}` (expected one of {}, all)",
            TABLE_IDS.join(", ")
        )));
    }
    Ok(all.into_iter().filter(|e| e.table == table).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct RowResult {
    pub expected: Expectation,
    pub pass: bool,
    pub beta: Option<(String, String)>,
    pub w_hat: Option<(String, String)>,
    pub strength: String,
    pub substitution_residual: Option<f64>,
    pub double_root_residual: Option<f64>,
    pub closed_form_gap: Option<f64>,
    pub detail: String,
}

/// Group cache shared by the rows of a run.
#[derive(Default)]
pub struct Groups {
    built: HashMap<String, (GroupSpec, FiniteMatrixGroup)>,
}

impl Groups {
    pub fn get(&mut self, spec: &str, cfg: &Config) -> CliResult<&(GroupSpec, FiniteMatrixGroup)> {
        if !self.built.contains_key(spec) {
            let gs = GroupSpec::parse(spec)?;
            let g = build_group(&gs, &cfg.tol, cfg.max_order)?;
            self.built.insert(spec.to_string(), (gs, g));
        }
        Ok(&self.built[spec])
    }
}

fn parse_strength(s: &str) -> Option<(u32, u32)> {
    let s = s.trim();
    if s == "{}" {
        return None;
    }
    match s.split_once('-') {
        Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
        None => s.parse().ok().map(|t| (t, t)),
    }
}

fn rat(s: &str) -> Option<Rational> {
    parse_rational(s).ok()
}

pub fn orbit_of(groups: &mut Groups, cfg: &Config, spec: &str, seed: &str) -> CliResult<LineSet> {
    let (gs, g) = groups.get(spec, cfg)?;
    let (_, v) = resolve_seed(gs, seed)?;
    Ok(orbit_lines(g, &v, &cfg.tol)?)
}

pub fn solve_row(groups: &mut Groups, cfg: &Config, row: &Expectation) -> CliResult<(LineSet, LineSet, UnionSolution)> {
    let x = orbit_of(groups, cfg, &row.group, &row.seed_x)?;
    let y = orbit_of(groups, cfg, &row.group, &row.seed_y)?;
    let sol = solve_union(&x, &y, row.t, cfg.t_max.max(row.t), &cfg.tol)?;
    Ok((x, y, sol))
}

pub fn run_row(groups: &mut Groups, cfg: &Config, row: &Expectation) -> CliResult<RowResult> {
    let want_strength = parse_strength(&row.strength);
    if row.is_single() {
        let x = orbit_of(groups, cfg, &row.group, &row.seed_x)?;
        let report = strength(&x, cfg.t_max.max(row.t), &cfg.tol);
        let got = (report.strength >= row.t).then_some((row.t, report.strength));
        let pass = got.is_some() && got == want_strength && row.beta_x == "1" && row.beta_y == "0";
        return Ok(RowResult {
            expected: row.clone(),
            pass,
            beta: Some(("1".into(), "0".into())),
            w_hat: Some(("1".into(), "0".into())),
            strength: got.map_or("{}".into(), |(a, b)| range_label(a, b)),
            substitution_residual: None,
            double_root_residual: None,
            closed_form_gap: None,
            detail: format!("{} lines, strength {}", x.len(), report.strength),
        });
    }

    let (x, y, sol) = solve_row(groups, cfg, row)?;
    let chk = check_double_root(&sol, &cfg.tol);
    let mut result = RowResult {
        expected: row.clone(),
        pass: false,
        beta: None,
        w_hat: None,
        strength: "{}".into(),
        substitution_residual: None,
        double_root_residual: Some(chk.residual),
        closed_form_gap: None,
        detail: format!("{}+{} lines", x.len(), y.len()),
    };
    if !row.expects_root() {
        result.pass = sol.kind == SolutionKind::NoRealRoot && want_strength.is_none();
        result.detail.push_str(&format!(", discriminant {:.3e}", sol.discriminant));
        return Ok(result);
    }
    let wanted = (rat(&row.beta_x), rat(&row.beta_y), rat(&row.what_x), rat(&row.what_y));
    let root = sol.roots.iter().find(|r| r.beta.map(|b| (Some(b.0), Some(b.1))) == Some((wanted.0, wanted.1)));
    let Some(root) = root.or(sol.preferred_root()) else {
        result.detail.push_str(", no real root");
        return Ok(result);
    };
    result.beta = root.beta.map(|b| (format_rational(&b.0), format_rational(&b.1)));
    result.w_hat = root.w_hat.map(|w| (format_rational(&w.0), format_rational(&w.1)));
    result.strength = root.interval.map_or("{}".into(), |(a, b)| range_label(a, b));
    result.substitution_residual = Some(root.substitution_residual);
    result.closed_form_gap = chk.root_gap;
    let exact = root.beta.map(|b| (Some(b.0), Some(b.1))) == Some((wanted.0, wanted.1))
        && root.w_hat.map(|w| (Some(w.0), Some(w.1))) == Some((wanted.2, wanted.3));
    result.pass = exact && root.interval == want_strength && root.substitution_residual <= cfg.tol.rel_eq;
    if sol.roots.len() > 1 {
        let others: Vec<String> = sol
            .roots
            .iter()
            .filter(|r| !std::ptr::eq(*r, root))
            .map(|r| match r.beta {
                Some(b) => format_rational(&b.0),
                None => format!("{:.6}", r.alpha),
            })
            .collect();
        result.detail.push_str(&format!(", other root beta_X = {}", others.join(", ")));
    }
    Ok(result)
}

pub fn run(table: &str, cfg: &Config) -> CliResult<Vec<RowResult>> {
    let mut groups = Groups::default();
    select(table)?.iter().map(|row| run_row(&mut groups, cfg, row)).collect()
}

pub fn render(rows: &[RowResult]) -> String {
    let mut out = String::new();
    for r in rows {
        let e = &r.expected;
        let pair = |p: &Option<(String, String)>| p.as_ref().map_or("-".to_string(), |(a, b)| format!("{a}, {b}"));
        out.push_str(&format!(
            "{} [{}] {:<32} t={} beta=({}) w_hat=({}) strength {}  ({})\n",
            if r.pass { "PASS" } else { "FAIL" },
            e.table,
            e.label(),
            e.t,
            pair(&r.beta),
            pair(&r.w_hat),
            r.strength,
            r.detail,
        ));
        if !r.pass {
            out.push_str(&format!(
                "     expected beta=({}, {}) w_hat=({}, {}) strength {}\n",
                e.beta_x, e.beta_y, e.what_x, e.what_y, e.strength
            ));
        }
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} rows match\n", rows.len()));
    out
}
