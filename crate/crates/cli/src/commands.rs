//! Subcommand implementations. Each returns its table text, a JSON value and
//! an exit status; `main` picks the rendering.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Value, json};
use ttdesign::designs::{DesignReport, double_to_antipodal, strength};
use ttdesign::groups::{CatalogEntry, GroupSpec, build_group, catalog, catalog_lookup};
use ttdesign::numerics::format_rational;
use ttdesign::orbits::{LineSet, orbit_lines};
use ttdesign::pairscan::{PairScanReport, ScanThresholds, scan};
use ttdesign::unions::{Certificate, SolutionKind, UnionSolution, check_double_root, emit_certificate, solve_union,
                       verify_certificate};

use crate::{CliError, CliResult, Config, EXIT_FAIL, EXIT_NO_ROOT, EXIT_OK, range_label, reproduce, resolve_seed};

pub struct Output {
    pub text: String,
    pub json: Value,
    pub code: i32,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output { text, json, code: EXIT_OK }
    }
}

fn report_json(r: &DesignReport) -> Value {
    json!({
        "strength": r.strength,
        "signed": r.signed,
        "potentials": r.potentials,
        "targets": r.targets,
        "residuals": r.residuals,
    })
}

fn report_text(out: &mut String, r: &DesignReport) {
    let _ = writeln!(out, "   t  potential               c_t                     residual");
    for k in 0..r.potentials.len() {
        let _ = writeln!(
            out,
            "  {:>2}  {:<22.17} {:<22.17} {:>10.3e}",
            k + 1,
            r.potentials[k],
            r.targets[k],
            r.residuals[k]
        );
    }
    let _ = writeln!(out, "strength {}{}", r.strength, if r.signed { " (signed weights)" } else { "" });
}

pub fn group(spec: &str, cfg: &Config) -> CliResult<Output> {
    let gs = GroupSpec::parse(spec)?;
    let g = build_group(&gs, &cfg.tol, cfg.max_order)?;
    let text = format!(
        "group {}\norder {}\ndim {}\nfield {}\ngenerators {}\nunitarized {}\nunitarity deviation {:.3e}\n",
        gs.label,
        g.order(),
        g.dim,
        match g.field {
            ttdesign::groups::Field::Real => "real",
            ttdesign::groups::Field::Complex => "complex",
        },
        g.generators.len(),
        g.conjugated,
        g.unitarity_deviation()
    );
    let json = json!({
        "group": gs.label,
        "order": g.order(),
        "dim": g.dim,
        "field": g.field.tag(),
        "generators": g.generators.len(),
        "unitarized": g.conjugated,
        "unitarity_deviation": g.unitarity_deviation(),
    });
    Ok(Output::ok(text, json))
}

fn lines_json(x: &LineSet) -> Value {
    let lines: Vec<Vec<[f64; 2]>> = x.lines().map(|l| l.iter().map(|z| [z.re, z.im]).collect()).collect();
    json!(lines)
}

pub fn orbit(spec: &str, seed: &str, dump: bool, cfg: &Config) -> CliResult<Output> {
    let gs = GroupSpec::parse(spec)?;
    let g = build_group(&gs, &cfg.tol, cfg.max_order)?;
    let (literal, v) = resolve_seed(&gs, seed)?;
    let x = orbit_lines(&g, &v, &cfg.tol)?;
    let r = strength(&x, cfg.t_max, &cfg.tol);
    let mut text = format!(
        "{} orbit of ({literal})\nlines {}\nstabilizer {}\n",
        gs.label,
        x.len(),
        x.multiplicity.unwrap_or(1)
    );
    report_text(&mut text, &r);
    if dump {
        for l in x.lines() {
            let cells: Vec<String> = l.iter().map(|z| format!("{:.17}{:+.17}i", z.re, z.im)).collect();
            let _ = writeln!(text, "{}", cells.join(" "));
        }
    }
    let mut json = json!({
        "group": gs.label,
        "seed": literal,
        "lines": x.len(),
        "stabilizer": x.multiplicity,
        "report": report_json(&r),
    });
    if dump {
        json["vectors"] = lines_json(&x);
    }
    Ok(Output::ok(text, json))
}

fn solution_json(sol: &UnionSolution, x: &LineSet, y: &LineSet, cfg: &Config) -> Value {
    let chk = check_double_root(sol, &cfg.tol);
    let roots: Vec<Value> = sol
        .roots
        .iter()
        .map(|r| {
            json!({
                "alpha": r.alpha,
                "beta": r.beta.map(|b| [format_rational(&b.0), format_rational(&b.1)]),
                "w_hat": r.w_hat.map(|w| [format_rational(&w.0), format_rational(&w.1)]),
                "class": r.class,
                "substitution_residual": r.substitution_residual,
                "strength": r.interval.map(|(a, b)| [a, b]),
                "signed": r.report.signed,
            })
        })
        .collect();
    let q = &sol.quadratic;
    json!({
        "t": sol.t,
        "sizes": [x.len(), y.len()],
        "b_xx": q.b_xx, "b_yy": q.b_yy, "b_xy": q.b_xy, "c_t": q.target,
        "coefficients": [q.a, q.b, q.c],
        "discriminant": sol.discriminant,
        "kind": sol.kind,
        "double_root": sol.double_root,
        "roots": roots,
        "preferred": sol.preferred,
        "double_root_check": chk,
    })
}

fn solution_text(sol: &UnionSolution, x: &LineSet, y: &LineSet, cfg: &Config) -> String {
    let q = &sol.quadratic;
    let mut out = String::new();
    let _ = writeln!(out, "|X| = {}, |Y| = {}, t = {}", x.len(), y.len(), sol.t);
    let _ = writeln!(out, "b_xx = {:.17}\nb_yy = {:.17}\nb_xy = {:.17}\nc_t  = {:.17}", q.b_xx, q.b_yy, q.b_xy, q.target);
    let _ = writeln!(out, "A = {:.6e}  B = {:.6e}  C = {:.6e}  disc = {:.6e}", q.a, q.b, q.c, sol.discriminant);
    match sol.kind {
        SolutionKind::AnyWeighting => {
            let _ = writeln!(out, "every weighting works: both orbits are already {}-designs", sol.t);
        }
        SolutionKind::NoRealRoot => {
            let _ = writeln!(out, "no real root");
        }
        SolutionKind::Roots => {
            for (i, r) in sol.roots.iter().enumerate() {
                let mark = if Some(i) == sol.preferred { "*" } else { " " };
                let beta = r.beta.map_or(format!("{:.12}", r.alpha), |b| {
                    format!("{}, {}", format_rational(&b.0), format_rational(&b.1))
                });
                let what = r.w_hat.map_or("-".into(), |w| format!("{}, {}", format_rational(&w.0), format_rational(&w.1)));
                let st = r.interval.map_or("{}".into(), |(a, b)| range_label(a, b));
                let _ = writeln!(
                    out,
                    "{mark} beta = ({beta})  w_hat = ({what})  {:?}  strength {st}  residual {:.2e}",
                    r.class, r.substitution_residual
                );
            }
            if sol.double_root {
                let _ = writeln!(out, "double root");
            }
        }
    }
    let chk = check_double_root(sol, &cfg.tol);
    let _ = writeln!(
        out,
        "double-root structure: {} (residual {:.2e}{})",
        if chk.holds { "holds" } else { "fails" },
        chk.residual,
        chk.closed_form_beta.map_or(String::new(), |b| format!(", closed-form beta_X {b:.12}"))
    );
    out
}

pub fn union(spec: &str, sx: &str, sy: &str, t: u32, emit: Option<&Path>, cfg: &Config) -> CliResult<Output> {
    if t == 0 {
        return Err(CliError::Usage("--t must be at least 1".into()));
    }
    let gs = GroupSpec::parse(spec)?;
    let g = build_group(&gs, &cfg.tol, cfg.max_order)?;
    let (lx, vx) = resolve_seed(&gs, sx)?;
    let (ly, vy) = resolve_seed(&gs, sy)?;
    let x = orbit_lines(&g, &vx, &cfg.tol)?;
    let y = orbit_lines(&g, &vy, &cfg.tol)?;
    let sol = solve_union(&x, &y, t, cfg.t_max.max(t), &cfg.tol)?;
    let mut text = solution_text(&sol, &x, &y, cfg);
    let solution = solution_json(&sol, &x, &y, cfg);
    if sol.kind == SolutionKind::NoRealRoot {
        if emit.is_some() {
            text.push_str("no certificate written\n");
        }
        return Ok(Output { text, json: json!({ "solution": solution, "certificate": null }), code: EXIT_NO_ROOT });
    }
    let cert = emit_certificate(&sol, &x, &y, &gs.label, [lx, ly], &cfg.tol)?;
    if let Some(path) = emit {
        std::fs::write(path, cert.to_json()?)?;
        let _ = writeln!(text, "certificate written to {}", path.display());
    }
    let json = json!({ "solution": solution, "certificate": cert });
    Ok(Output::ok(text, json))
}

fn scan_text(r: &PairScanReport) -> String {
    let mut out = format!(
        "{}: {} samples, PRNG seed {}, {} redraws\n   t  verdict        holds fails degen indet  max residual\n",
        r.group, r.samples, r.seed, r.redraws
    );
    for row in &r.rows {
        let _ = writeln!(
            out,
            "  {:>2}  {:<13} {:>5} {:>5} {:>5} {:>5}  {:.2e}",
            row.t,
            format!("{:?}", row.verdict).to_lowercase(),
            row.holds,
            row.fails,
            row.degenerate,
            row.indeterminate,
            row.max_residual
        );
    }
    let _ = writeln!(out, "t_generic {}", range_label(1, r.t_generic.max(1)));
    let _ = writeln!(out, "t_pairs {}", r.t_pairs_label());
    let _ = writeln!(out, "(sampled evidence only: generic claims cannot be proved by sampling)");
    out
}

pub fn scan_cmd(spec: &str, samples: usize, seed: u64, cfg: &Config) -> CliResult<Output> {
    let gs = GroupSpec::parse(spec)?;
    let g = build_group(&gs, &cfg.tol, cfg.max_order)?;
    let r = scan(&g, cfg.t_max, samples, seed, &ScanThresholds::default())?;
    let mut json = serde_json::to_value(&r).map_err(ttdesign::Error::from)?;
    json["t_pairs_label"] = json!(r.t_pairs_label());
    Ok(Output::ok(scan_text(&r), json))
}

/// Accepts a bare certificate or the `{"solution", "certificate"}` envelope.
pub fn load_certificate(text: &str) -> CliResult<Certificate> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Core(ttdesign::Error::Schema(format!("certificate: {e}"))))?;
    let inner = match value.get("certificate") {
        Some(c) if value.get("schema").is_none() => c.clone(),
        _ => value,
    };
    Ok(Certificate::from_json(&inner.to_string())?)
}

pub fn verify(path: &Path, cfg: &Config) -> CliResult<Output> {
    let text = std::fs::read_to_string(path)?;
    let cert = load_certificate(&text)?;
    let rep = verify_certificate(&cert, &cfg.tol)?;
    let mut out = format!("{} lines in {} dimension(s), claimed t = {}\n", cert.lines.len(), cert.dim, cert.t);
    let _ = writeln!(out, "   t  potential               c_t                     residual    stored");
    for r in &rep.rows {
        let _ = writeln!(
            out,
            "  {:>2}  {:<22.17} {:<22.17} {:>10.3e}  {}  {}",
            r.t,
            r.potential,
            r.target,
            r.residual,
            r.stored.map_or("-".into(), |s| format!("{s:.3e}")),
            if r.ok { "ok" } else { "FAIL" }
        );
    }
    let _ = writeln!(out, "{}", if rep.pass { "PASS" } else { "FAIL" });
    let json = serde_json::to_value(&rep).map_err(ttdesign::Error::from)?;
    Ok(Output { text: out, json, code: if rep.pass { EXIT_OK } else { EXIT_FAIL } })
}

pub fn reproduce_cmd(table: &str, cfg: &Config) -> CliResult<Output> {
    let rows = reproduce::run(table, cfg)?;
    let pass = rows.iter().all(|r| r.pass);
    let json = serde_json::to_value(&rows).map_err(ttdesign::Error::from)?;
    Ok(Output { text: reproduce::render(&rows), json, code: if pass { EXIT_OK } else { EXIT_FAIL } })
}

fn entry_json(e: &CatalogEntry) -> Value {
    json!({
        "spec": e.spec,
        "order": e.order,
        "seeds": e.seeds.iter().map(|s| json!({"name": s.name, "literal": s.literal, "lines": s.lines})).collect::<Vec<_>>(),
    })
}

pub fn catalog_cmd(spec: Option<&str>) -> CliResult<Output> {
    let entries = match spec {
        Some(s) => vec![catalog_lookup(s).ok_or_else(|| CliError::Usage(format!("`{s}` is not in the catalog")))?],
        None => catalog(),
    };
    let mut text = String::new();
    for e in &entries {
        let _ = writeln!(text, "{} (order {})", e.spec, e.order);
        for s in &e.seeds {
            let _ = writeln!(text, "  @{:<11} {:>4} lines  {}", s.name, s.lines, s.literal);
        }
    }
    let json = Value::Array(entries.iter().map(entry_json).collect());
    Ok(Output::ok(text, json))
}

/// Antipodal doubling of a real certificate's lines, checked as a spherical design.
pub fn double(path: &Path, cfg: &Config) -> CliResult<Output> {
    let cert = load_certificate(&std::fs::read_to_string(path)?)?;
    let set = cert.line_set()?;
    let s = verify_certificate(&cert, &cfg.tol)?.rows.iter().take_while(|r| r.ok).count() as u32;
    let anti = double_to_antipodal(&set)?;
    let want = ttdesign::designs::AntipodalSet::predicted_degree(s);
    let got = anti.spherical_degree(want + 1, &cfg.tol);
    let text = format!(
        "{} points on S^{}; half-design strength {s}, spherical degree {got} (predicted {want})\n",
        anti.points.len(),
        anti.dim - 1
    );
    let json = json!({ "points": anti.points.len(), "half_strength": s, "degree": got, "predicted": want });
    Ok(Output { text, json, code: if got >= want { EXIT_OK } else { EXIT_FAIL } })
}
