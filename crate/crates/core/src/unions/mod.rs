//! The union-weighting quadratic for a pair of line sets.

pub mod certificate;

use serde::Serialize;

use crate::designs::{DesignReport, check_compatible, pair_potentials, strength, welch_f64};
use crate::error::Result;
use crate::numerics::{Rational, Tolerance, snap_to_rational};
use crate::orbits::{LineSet, union_lines, union_lines_f64};
pub use certificate::{Certificate, VerifyReport, emit_certificate, verify_certificate};

/// Roots closer than this (relative) are merged into their midpoint.
const ROOT_MERGE_REL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairQuadratic {
    pub t: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub b_xx: f64,
    pub b_yy: f64,
    pub b_xy: f64,
    /// Welch constant `c_t`.
    pub target: f64,
}

impl PairQuadratic {
    pub fn eval(&self, alpha: f64) -> f64 {
        (self.a * alpha + self.b) * alpha + self.c
    }

    fn scale(&self) -> f64 {
        self.b_xx.abs().max(self.b_yy.abs()).max(self.b_xy.abs()).max(self.target)
    }

    /// `B^2 - 4AC`, evaluated from the deviations of the potentials from `c_t`
    /// (algebraically `4((b_xy - c)^2 - (b_xx - c)(b_yy - c))`).
    pub fn discriminant(&self) -> f64 {
        let dx = self.b_xx - self.target;
        let dy = self.b_yy - self.target;
        let dxy = self.b_xy - self.target;
        4.0 * (dxy * dxy - dx * dy)
    }
}

/// Coefficients of `A a^2 + B a + C = 0` in `a = beta_X`.
pub fn pair_quadratic(x: &LineSet, y: &LineSet, t: u32) -> Result<PairQuadratic> {
    check_compatible(x, y)?;
    let b_xx = pair_potentials(x, x, t)[t as usize - 1];
    let b_yy = pair_potentials(y, y, t)[t as usize - 1];
    let b_xy = pair_potentials(x, y, t)[t as usize - 1];
    let target = welch_f64(x.field, x.dim, t);
    Ok(quadratic_from(t, b_xx, b_yy, b_xy, target))
}

pub(crate) fn quadratic_from(t: u32, b_xx: f64, b_yy: f64, b_xy: f64, target: f64) -> PairQuadratic {
    PairQuadratic {
        t,
        a: b_xx + b_yy - 2.0 * b_xy,
        b: 2.0 * b_xy - 2.0 * b_yy,
        c: b_yy - target,
        b_xx,
        b_yy,
        b_xy,
        target,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RootClass {
    Convex,
    Boundary,
    Signed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Roots,
    /// The quadratic vanishes identically; every weighting works.
    AnyWeighting,
    NoRealRoot,
}

#[derive(Clone, Debug)]
pub struct UnionRoot {
    pub alpha: f64,
    pub beta: Option<(Rational, Rational)>,
    /// `beta * n / |X|`, with `n` the number of lines that carry weight.
    pub w_hat: Option<(Rational, Rational)>,
    pub class: RootClass,
    /// `|A a^2 + B a + C| / c_t` at the snapped value (or the float root if unsnapped).
    pub substitution_residual: f64,
    /// Strength report of the weighted union.
    pub report: DesignReport,
    /// `(t, strength)` when the union reaches the requested order.
    pub interval: Option<(u32, u32)>,
}

impl UnionRoot {
    pub fn convex(&self) -> bool {
        self.class == RootClass::Convex
    }
}

#[derive(Clone, Debug)]
pub struct UnionSolution {
    pub t: u32,
    pub quadratic: PairQuadratic,
    pub discriminant: f64,
    pub kind: SolutionKind,
    pub double_root: bool,
    pub roots: Vec<UnionRoot>,
    /// Index into `roots` chosen by the preference order.
    pub preferred: Option<usize>,
    pub sizes: (usize, usize),
}

impl UnionSolution {
    pub fn preferred_root(&self) -> Option<&UnionRoot> {
        self.preferred.map(|i| &self.roots[i])
    }
}

fn classify(alpha: f64, tol: &Tolerance) -> RootClass {
    if alpha.abs() <= tol.rel_eq || (alpha - 1.0).abs() <= tol.rel_eq {
        RootClass::Boundary
    } else if alpha > 0.0 && alpha < 1.0 {
        RootClass::Convex
    } else {
        RootClass::Signed
    }
}

fn real_roots(q: &PairQuadratic, tol: &Tolerance) -> (SolutionKind, bool, Vec<f64>) {
    let eps = tol.rel_eq * q.scale();
    let (a0, b0, c0) = (q.a.abs() <= eps, q.b.abs() <= eps, q.c.abs() <= eps);
    if a0 && b0 {
        return if c0 {
            (SolutionKind::AnyWeighting, false, vec![])
        } else {
            (SolutionKind::NoRealRoot, false, vec![])
        };
    }
    if a0 {
        return (SolutionKind::Roots, false, vec![-q.c / q.b]);
    }
    let disc = q.discriminant();
    let disc_scale = (q.b * q.b).max((4.0 * q.a * q.c).abs());
    if disc.abs() <= tol.rel_eq * disc_scale {
        return (SolutionKind::Roots, true, vec![-q.b / (2.0 * q.a)]);
    }
    if disc < 0.0 {
        return (SolutionKind::NoRealRoot, false, vec![]);
    }
    let sq = disc.sqrt();
    let qq = -0.5 * (q.b + q.b.signum() * sq);
    let (r1, r2) = if qq == 0.0 { (0.0, 0.0) } else { (qq / q.a, q.c / qq) };
    if (r1 - r2).abs() <= ROOT_MERGE_REL * 1f64.max(r1.abs()).max(r2.abs()) {
        return (SolutionKind::Roots, true, vec![0.5 * (r1 + r2)]);
    }
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    (SolutionKind::Roots, false, vec![lo, hi])
}

fn build_root(
    x: &LineSet,
    y: &LineSet,
    q: &PairQuadratic,
    alpha: f64,
    t_max: u32,
    tol: &Tolerance,
) -> Result<UnionRoot> {
    let one = Rational::from_integer(1);
    let snapped = snap_to_rational(alpha, tol).filter(|r| {
        let v = *r.numer() as f64 / *r.denom() as f64;
        q.eval(v).abs() <= tol.rel_eq * q.target
    });
    let (nx, ny) = (x.len() as i64, y.len() as i64);
    let (union, residual, beta, w_hat) = match snapped {
        Some(bx) => {
            let by = one - bx;
            let v = *bx.numer() as f64 / *bx.denom() as f64;
            let u = union_lines(x, y, (bx, by), tol)?;
            // Normalized against the support of the union: zero-weight lines do not count.
            let n = Rational::from_integer(u.len() as i64);
            let w = (bx * n / Rational::from_integer(nx), by * n / Rational::from_integer(ny));
            (u, q.eval(v).abs() / q.target, Some((bx, by)), Some(w))
        }
        None => {
            let u = union_lines_f64(x, y, alpha, tol)?;
            (u, q.eval(alpha).abs() / q.target, None, None)
        }
    };
    let report = strength(&union, t_max.max(q.t), tol);
    let interval = (report.strength >= q.t).then_some((q.t, report.strength));
    Ok(UnionRoot {
        alpha,
        beta,
        w_hat,
        class: classify(beta.map_or(alpha, |b| *b.0.numer() as f64 / *b.0.denom() as f64), tol),
        substitution_residual: residual,
        report,
        interval,
    })
}

/// Solves the union quadratic at order `t` and verifies each root up to `t_max`.
pub fn solve_union(x: &LineSet, y: &LineSet, t: u32, t_max: u32, tol: &Tolerance) -> Result<UnionSolution> {
    let q = pair_quadratic(x, y, t)?;
    let (kind, double_root, alphas) = real_roots(&q, tol);
    let roots = alphas
        .iter()
        .map(|a| build_root(x, y, &q, *a, t_max, tol))
        .collect::<Result<Vec<_>>>()?;
    let preferred = roots
        .iter()
        .enumerate()
        .min_by(|(_, r), (_, s)| {
            r.class
                .cmp(&s.class)
                .then((r.alpha - 0.5).abs().total_cmp(&(s.alpha - 0.5).abs()))
        })
        .map(|(i, _)| i);
    Ok(UnionSolution {
        t,
        quadratic: q,
        discriminant: q.discriminant(),
        kind,
        double_root,
        roots,
        preferred,
        sizes: (x.len(), y.len()),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DoubleRootCheck {
    pub holds: bool,
    /// `|(b_xx b_yy - b_xy^2) - c_t (b_xx + b_yy - 2 b_xy)|` relative to the larger side.
    pub residual: f64,
    /// Both sides vanish because the pair is (numerically) a pair of designs.
    pub degenerate: bool,
    /// `(b_yy - b_xy) / (b_xx + b_yy - 2 b_xy)`.
    pub closed_form_beta: Option<f64>,
    /// Distance between the closed form and the preferred quadratic root.
    pub root_gap: Option<f64>,
}

pub fn check_double_root(sol: &UnionSolution, tol: &Tolerance) -> DoubleRootCheck {
    let q = &sol.quadratic;
    let c = q.target;
    let lhs = q.b_xx * q.b_yy - q.b_xy * q.b_xy;
    let rhs = c * q.a;
    let (dx, dy, dxy) = (q.b_xx - c, q.b_yy - c, q.b_xy - c);
    let diff = (dx * dy - dxy * dxy).abs();
    let side = lhs.abs().max(rhs.abs());
    let degenerate = q.a.abs() <= tol.rel_eq * q.scale();
    if degenerate {
        return DoubleRootCheck {
            holds: diff <= tol.rel_eq * c * c,
            residual: diff / (c * c),
            degenerate: true,
            closed_form_beta: None,
            root_gap: None,
        };
    }
    let residual = if side > 0.0 { diff / side } else { 0.0 };
    let beta = (q.b_yy - q.b_xy) / q.a;
    let gap = sol.preferred_root().map(|r| (r.alpha - beta).abs());
    DoubleRootCheck {
        holds: residual <= tol.rel_eq,
        residual,
        degenerate: false,
        closed_form_beta: Some(beta),
        root_gap: gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{DEFAULT_MAX_ORDER, GroupSpec, build_group};
    use crate::orbits::{orbit_lines, parse_vector};

    fn orbit(group: &str, seed: &str) -> LineSet {
        let g = build_group(&GroupSpec::parse(group).unwrap(), &Tolerance::default(), DEFAULT_MAX_ORDER)
            .unwrap();
        orbit_lines(&g, &parse_vector(seed).unwrap(), &Tolerance::default()).unwrap()
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn identical_inputs_are_degenerate() {
        let x = orbit("G(2,1,3)", "1,1,0");
        let q = pair_quadratic(&x, &x, 2).unwrap();
        assert_eq!(q.a, 0.0);
        assert_eq!(q.b, 0.0);
        assert!((q.c - (q.b_xx - q.target)).abs() < 1e-18);
    }

    #[test]
    fn two_designs_allow_any_weighting() {
        let tol = Tolerance::default();
        let x = orbit("binI", "1,0");
        let y = orbit("binI", "0.8,0.3+0.5i");
        let sol = solve_union(&x, &y, 4, 6, &tol).unwrap();
        assert_eq!(sol.kind, SolutionKind::AnyWeighting);
        assert!(check_double_root(&sol, &tol).degenerate);
    }

    #[test]
    fn b2_pair() {
        let tol = Tolerance::default();
        let x = orbit("G(2,1,2)", "1,0");
        let y = orbit("G(2,1,2)", "1,1");
        let sol = solve_union(&x, &y, 2, 6, &tol).unwrap();
        assert!(sol.double_root);
        let root = sol.preferred_root().unwrap();
        assert_eq!(root.beta, Some((r(1, 2), r(1, 2))));
        assert_eq!(root.w_hat, Some((r(1, 1), r(1, 1))));
        assert_eq!(root.interval, Some((2, 3)));
        let chk = check_double_root(&sol, &tol);
        assert!(chk.holds);
        assert!((chk.closed_form_beta.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn a3_pair() {
        let tol = Tolerance::default();
        let x = orbit("A(3)", "1,1,-1,-1");
        let y = orbit("A(3)", "3,-1,-1,-1");
        assert_eq!((x.len(), y.len()), (3, 4));
        let sol = solve_union(&x, &y, 2, 6, &tol).unwrap();
        let root = sol.preferred_root().unwrap();
        assert_eq!(root.beta, Some((r(2, 5), r(3, 5))));
        assert_eq!(root.w_hat, Some((r(14, 15), r(21, 20))));
        assert!(root.convex());
        assert!(root.substitution_residual <= 1e-9);
    }

    #[test]
    fn binary_octahedral_pairs() {
        let tol = Tolerance::default();
        let six = orbit("binO", "1,0");
        let s3 = 1.0 / 3f64.sqrt();
        let eight = orbit("binO", &format!("{},{}+{}i", 1.0 + s3, s3, s3));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let twelve = orbit("binO", &format!("1,{h}+{h}i"));
        assert_eq!((six.len(), eight.len(), twelve.len()), (6, 8, 12));

        let sol = solve_union(&six, &twelve, 4, 8, &tol).unwrap();
        let root = sol.preferred_root().unwrap();
        assert_eq!(root.beta, Some((r(1, 5), r(4, 5))));
        assert_eq!(root.w_hat, Some((r(3, 5), r(6, 5))));
        assert_eq!(root.interval, Some((4, 5)));

        let sol = solve_union(&eight, &twelve, 4, 8, &tol).unwrap();
        let root = sol.preferred_root().unwrap();
        assert_eq!(root.beta, Some((r(-3, 5), r(8, 5))));
        assert_eq!(root.class, RootClass::Signed);
        assert!(root.report.signed);
    }

    #[test]
    fn d4_pair_has_no_root() {
        let tol = Tolerance::default();
        let x = orbit("G(2,2,4)", "1,0,0,0");
        let y = orbit("G(2,2,4)", "1,1,1,1");
        let sol = solve_union(&x, &y, 2, 4, &tol).unwrap();
        assert_eq!(sol.kind, SolutionKind::NoRealRoot);
        assert!(sol.roots.is_empty());
        assert!(sol.discriminant < 0.0);
    }

    #[test]
    fn merges_close_roots() {
        let q = quadratic_from(2, 0.5 + 1e-3, 0.5 + 1e-3, 0.5 - 1e-3, 0.5);
        let (kind, double, roots) = real_roots(&q, &Tolerance::default());
        assert_eq!(kind, SolutionKind::Roots);
        assert!(double);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn linear_case() {
        // b_xx + b_yy = 2 b_xy makes A vanish.
        let q = quadratic_from(1, 0.6, 0.4, 0.5, 0.45);
        let (kind, _, roots) = real_roots(&q, &Tolerance::default());
        assert_eq!(kind, SolutionKind::Roots);
        assert_eq!(roots.len(), 1);
        assert!(q.eval(roots[0]).abs() < 1e-15);
    }
}
