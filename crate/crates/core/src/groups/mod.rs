//! Finite matrix groups: construction, closure and unitarization.

pub mod catalog;
pub mod generators;
pub mod spec;

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::numerics::{ComplexDd, Dd, Tolerance, lift_complex};
pub use catalog::{CatalogEntry, CatalogSeed, catalog, lookup as catalog_lookup};
pub use generators::CMat;
pub use spec::{GroupKind, GroupSpec};

pub const DEFAULT_MAX_ORDER: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "C")]
    Complex,
}

impl Field {
    pub fn parse(s: &str) -> Result<Field> {
        match s.trim() {
            "R" | "r" | "real" => Ok(Field::Real),
            "C" | "c" | "complex" => Ok(Field::Complex),
            other => Err(Error::Parse(format!("unknown field tag `{other}`"))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Field::Real => "R",
            Field::Complex => "C",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

/// Output of [`build_generators`].
#[derive(Clone, Debug)]
pub struct Generators {
    pub spec: GroupSpec,
    pub field: Field,
    pub dim: usize,
    pub matrices: Vec<DMatrix<Complex64>>,
    /// Maps seed coordinates to working coordinates (A(d) hyperplane model).
    pub seed_map: Option<DMatrix<Complex64>>,
}

fn to_dmatrix(m: &CMat<f64>) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.rows, m.cols, &m.data)
}

pub fn build_generators(spec: &GroupSpec) -> Result<Generators> {
    let r = generators::recipe::<f64>(spec);
    let matrices: Vec<_> = r.generators.iter().map(to_dmatrix).collect();
    let dim = matrices.first().map_or(0, |m| m.nrows());
    if spec.field() == Field::Real && matrices.iter().any(|m| m.iter().any(|z| z.im != 0.0)) {
        return Err(Error::FieldMismatch(format!(
            "{spec} is tagged real but has complex generator entries"
        )));
    }
    Ok(Generators {
        spec: spec.clone(),
        field: spec.field(),
        dim,
        matrices,
        seed_map: r.seed_map.as_ref().map(to_dmatrix),
    })
}

/// Position of an element in the breadth-first closure: `elements[parent] * generators[generator]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Word {
    pub parent: u32,
    pub generator: u32,
}

#[derive(Clone, Debug)]
pub struct FiniteMatrixGroup {
    pub spec: GroupSpec,
    pub dim: usize,
    pub field: Field,
    pub elements: Vec<DMatrix<Complex64>>,
    /// BFS tree; `words[0]` is the identity and has no parent.
    pub words: Vec<Word>,
    pub generators: Vec<DMatrix<Complex64>>,
    pub seed_map: Option<DMatrix<Complex64>>,
    /// True once [`unitarize`] changed coordinates.
    pub conjugated: bool,
}

impl FiniteMatrixGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Largest `|g* g - I|` entry over the group.
    pub fn unitarity_deviation(&self) -> f64 {
        self.elements.iter().map(unitarity_deviation).fold(0.0, f64::max)
    }

    /// Dimension of seed vectors accepted by [`Self::seed_to_working`].
    pub fn seed_dim(&self) -> usize {
        self.seed_map.as_ref().map_or(self.dim, |m| m.ncols())
    }

    /// Brings a seed given in user coordinates into the coordinates the group acts on.
    pub fn seed_to_working(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.seed_dim() {
            return Err(Error::DimensionMismatch { expected: self.seed_dim(), got: v.len() });
        }
        if self.field == Field::Real && v.iter().any(|z| z.im != 0.0) {
            return Err(Error::FieldMismatch(format!(
                "{} is real but the seed has complex entries",
                self.spec
            )));
        }
        let Some(map) = &self.seed_map else {
            return Ok(v.to_vec());
        };
        if let GroupKind::Symmetric { .. } = self.spec.kind {
            let sum: Complex64 = v.iter().sum();
            let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
            if sum.norm() > 1e-12 * scale * v.len() as f64 {
                return Err(Error::InvalidInput(format!(
                    "seeds for {} must have zero coordinate sum",
                    self.spec
                )));
            }
        }
        let x = nalgebra::DVector::from_column_slice(v);
        Ok((map * x).iter().copied().collect())
    }

    /// Elements recomputed in double-double precision by replaying the closure words.
    ///
    /// Catalog groups rebuild their generators from exact recipes; explicit or
    /// unitarized groups lift their f64 generators, so they gain nothing beyond f64.
    pub fn high_precision(&self) -> HighPrecisionGroup {
        let gens: Vec<CMat<Dd>> = if self.conjugated || matches!(self.spec.kind, GroupKind::Explicit(_)) {
            self.generators
                .iter()
                .map(|g| CMat {
                    rows: self.dim,
                    cols: self.dim,
                    data: (0..self.dim * self.dim)
                        .map(|k| lift_complex(g[(k / self.dim, k % self.dim)]))
                        .collect(),
                })
                .collect()
        } else {
            generators::recipe::<TwoFloat>(&self.spec).generators
        };
        let mut elements: Vec<CMat<Dd>> = Vec::with_capacity(self.order());
        elements.push(CMat::identity(self.dim));
        for w in &self.words[1..] {
            let next = elements[w.parent as usize].mul(&gens[w.generator as usize]);
            elements.push(next);
        }
        HighPrecisionGroup {
            dim: self.dim,
            elements: elements.into_iter().map(|m| m.data).collect(),
        }
    }
}

/// Group elements in double-double precision, row-major.
pub struct HighPrecisionGroup {
    pub dim: usize,
    pub elements: Vec<Vec<ComplexDd>>,
}

impl HighPrecisionGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn apply(&self, g: usize, v: &[ComplexDd], out: &mut [ComplexDd]) {
        let m = &self.elements[g];
        let d = self.dim;
        for i in 0..d {
            let mut acc = Complex::new(TwoFloat::from(0.0), TwoFloat::from(0.0));
            for j in 0..d {
                acc += m[i * d + j] * v[j];
            }
            out[i] = acc;
        }
    }
}

fn unitarity_deviation(g: &DMatrix<Complex64>) -> f64 {
    let p = g.adjoint() * g;
    let mut dev = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let t = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((p[(i, j)] - Complex64::new(t, 0.0)).norm());
        }
    }
    dev
}

fn matrix_key(m: &DMatrix<Complex64>, scale: f64) -> Result<Vec<i64>> {
    let mut key = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            for x in [z.re, z.im] {
                let y = (x * scale).round();
                if !y.is_finite() || y.abs() > 9e15 {
                    return Err(Error::NumericRange(format!(
                        "matrix entry {x} too large for a dedup key"
                    )));
                }
                key.push(y as i64);
            }
        }
    }
    Ok(key)
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Breadth-first closure of the generated group.
pub fn close_group(gens: &Generators, tol: &Tolerance, max_order: usize) -> Result<FiniteMatrixGroup> {
    let d = gens.dim;
    if gens.matrices.is_empty() {
        return Err(Error::InvalidGroup("no generators".into()));
    }
    for g in &gens.matrices {
        if g.nrows() != d || g.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.nrows().max(g.ncols()) });
        }
        if g.determinant().norm() < 1e-12 {
            return Err(Error::InvalidGroup("generator is singular".into()));
        }
    }
    let scale = tol.key_scale();
    let identity = DMatrix::<Complex64>::identity(d, d);
    let mut index: HashMap<Vec<i64>, u32> = HashMap::new();
    index.insert(matrix_key(&identity, scale)?, 0);
    let mut elements = vec![identity];
    let mut words = vec![Word { parent: u32::MAX, generator: u32::MAX }];

    let mut head = 0;
    while head < elements.len() {
        for (gi, g) in gens.matrices.iter().enumerate() {
            let prod = &elements[head] * g;
            let key = matrix_key(&prod, scale)?;
            match index.get(&key) {
                Some(&k) => {
                    let diff = max_diff(&elements[k as usize], &prod);
                    if diff > tol.rel_eq {
                        return Err(Error::KeyCollision { diff });
                    }
                }
                None => {
                    if elements.len() >= max_order {
                        return Err(Error::SizeLimit { limit: max_order });
                    }
                    index.insert(key, elements.len() as u32);
                    elements.push(prod);
                    words.push(Word { parent: head as u32, generator: gi as u32 });
                }
            }
        }
        head += 1;
    }

    Ok(FiniteMatrixGroup {
        spec: gens.spec.clone(),
        dim: d,
        field: gens.field,
        elements,
        words,
        generators: gens.matrices.clone(),
        seed_map: gens.seed_map.clone(),
        conjugated: false,
    })
}

/// Conjugates the group into a unitary one via the averaged Hermitian form.
pub fn unitarize(group: FiniteMatrixGroup, tol: &Tolerance) -> Result<FiniteMatrixGroup> {
    if group.unitarity_deviation() <= tol.rel_eq {
        return Ok(group);
    }
    let d = group.dim;
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for g in &group.elements {
        h += g.adjoint() * g;
    }
    h /= Complex64::new(group.order() as f64, 0.0);
    // Symmetrize away rounding before factoring.
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let chol = h
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Degenerate("invariant form is not positive definite".into()))?;
    let l = chol.l();
    let diag: Vec<f64> = (0..d).map(|i| l[(i, i)].re).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if dmin.is_nan() || dmin <= 1e-7 * dmax {
        return Err(Error::Degenerate(format!(
            "invariant form is numerically singular (diagonal ratio {:e})",
            dmin / dmax
        )));
    }
    let l_adj = l.adjoint();
    let l_adj_inv = l_adj
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("Cholesky factor is not invertible".into()))?;
    let conj = |g: &DMatrix<Complex64>| &l_adj * g * &l_adj_inv;

    let elements: Vec<_> = group.elements.iter().map(conj).collect();
    let generators: Vec<_> = group.generators.iter().map(conj).collect();
    let seed_map = Some(match &group.seed_map {
        Some(m) => &l_adj * m,
        None => l_adj.clone(),
    });
    let out = FiniteMatrixGroup {
        elements,
        generators,
        seed_map,
        conjugated: true,
        ..group
    };
    let dev = out.unitarity_deviation();
    if dev > 1e-9 {
        return Err(Error::Degenerate(format!("unitarization left deviation {dev:e}")));
    }
    Ok(out)
}

/// Builds, closes and unitarizes a group.
pub fn build_group(spec: &GroupSpec, tol: &Tolerance, max_order: usize) -> Result<FiniteMatrixGroup> {
    let gens = build_generators(spec)?;
    let group = close_group(&gens, tol, max_order)?;
    unitarize(group, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn order_of(s: &str) -> usize {
        let spec = GroupSpec::parse(s).unwrap();
        build_group(&spec, &Tolerance::default(), DEFAULT_MAX_ORDER).unwrap().order()
    }

    #[test]
    fn orders_of_small_groups() {
        assert_eq!(order_of("dihedral(3)"), 6);
        assert_eq!(order_of("dihedral(5)"), 10);
        assert_eq!(order_of("rot(5)"), 5);
        assert_eq!(order_of("binD(4)"), 8);
        assert_eq!(order_of("binD(8)"), 16);
        assert_eq!(order_of("binT"), 24);
        assert_eq!(order_of("binO"), 48);
        assert_eq!(order_of("binI"), 120);
        assert_eq!(order_of("H3"), 120);
        assert_eq!(order_of("heis(3)"), 27);
        assert_eq!(order_of("heis(4)"), 64);
        assert_eq!(order_of("heis(2)"), 8);
        assert_eq!(order_of("A(3)"), 24);
        assert_eq!(order_of("G(1,1,5)"), 120);
        assert_eq!(order_of("A(5)"), 720);
    }

    #[test]
    fn imprimitive_order_law() {
        for (m, p, n) in [(2, 1, 2), (2, 1, 3), (2, 1, 4), (2, 2, 3), (2, 2, 4), (3, 1, 2), (3, 3, 2),
                          (4, 2, 2), (4, 4, 3), (3, 1, 3), (6, 3, 2), (5, 5, 2)] {
            let expect = (m as usize).pow(n) * (1..=n as usize).product::<usize>() / p as usize;
            assert_eq!(order_of(&format!("G({m},{p},{n})")), expect, "G({m},{p},{n})");
        }
    }

    #[test]
    fn larger_orders() {
        assert_eq!(order_of("G(2,1,5)"), 3840);
        assert_eq!(order_of("G(2,2,5)"), 1920);
    }

    #[test]
    fn size_limit_enforced() {
        let spec = GroupSpec::parse("G(2,1,4)").unwrap();
        let err = build_group(&spec, &Tolerance::default(), 100).unwrap_err();
        assert!(matches!(err, Error::SizeLimit { limit: 100 }));
    }

    #[test]
    fn coarse_keys_collide() {
        let spec = GroupSpec::parse("dihedral(200)").unwrap();
        let tol = Tolerance { dedup_digits: 1, ..Tolerance::default() };
        let err = build_group(&spec, &tol, DEFAULT_MAX_ORDER).unwrap_err();
        assert!(matches!(err, Error::KeyCollision { .. }), "{err}");
    }

    #[test]
    fn closure_contains_identity_and_inverses() {
        let spec = GroupSpec::parse("binO").unwrap();
        let tol = Tolerance::default();
        let g = build_group(&spec, &tol, DEFAULT_MAX_ORDER).unwrap();
        let keys: BTreeSet<Vec<i64>> =
            g.elements.iter().map(|m| matrix_key(m, tol.key_scale()).unwrap()).collect();
        assert_eq!(keys.len(), g.order());
        for m in &g.elements {
            let inv = m.adjoint();
            assert!(keys.contains(&matrix_key(&inv, tol.key_scale()).unwrap()));
            for n in g.elements.iter().step_by(7) {
                assert!(keys.contains(&matrix_key(&(m * n), tol.key_scale()).unwrap()));
            }
        }
    }

    #[test]
    fn generator_order_independence() {
        let tol = Tolerance::default();
        let spec = GroupSpec::parse("G(2,2,4)").unwrap();
        let mut gens = build_generators(&spec).unwrap();
        let a = close_group(&gens, &tol, DEFAULT_MAX_ORDER).unwrap();
        gens.matrices.reverse();
        let b = close_group(&gens, &tol, DEFAULT_MAX_ORDER).unwrap();
        let ka: BTreeSet<_> = a.elements.iter().map(|m| matrix_key(m, 1e6).unwrap()).collect();
        let kb: BTreeSet<_> = b.elements.iter().map(|m| matrix_key(m, 1e6).unwrap()).collect();
        assert_eq!(ka, kb);
    }

    #[test]
    fn unitary_input_is_unchanged() {
        let tol = Tolerance::default();
        for s in ["dihedral(3)", "heis(3)"] {
            let spec = GroupSpec::parse(s).unwrap();
            let closed = close_group(&build_generators(&spec).unwrap(), &tol, DEFAULT_MAX_ORDER).unwrap();
            let before = closed.elements.clone();
            let after = unitarize(closed, &tol).unwrap();
            assert!(!after.conjugated);
            for (x, y) in before.iter().zip(&after.elements) {
                assert!(max_diff(x, y) < 1e-12);
            }
        }
    }

    #[test]
    fn high_precision_replay_matches() {
        let spec = GroupSpec::parse("binI").unwrap();
        let g = build_group(&spec, &Tolerance::default(), DEFAULT_MAX_ORDER).unwrap();
        let hp = g.high_precision();
        assert_eq!(hp.order(), 120);
        for (m, h) in g.elements.iter().zip(&hp.elements) {
            for k in 0..4 {
                let z = m[(k / 2, k % 2)];
                assert!((z.re - f64::from(h[k].re)).abs() < 1e-14);
                assert!((z.im - f64::from(h[k].im)).abs() < 1e-14);
            }
        }
        // elements stay unitary to double-double accuracy
        for h in &hp.elements {
            let n0 = h[0].norm_sqr() + h[2].norm_sqr();
            assert!(f64::from((n0 - TwoFloat::from(1.0)).abs()) < 1e-28);
        }
    }

    #[test]
    fn seed_map_for_hyperplane_model() {
        let spec = GroupSpec::parse("A(3)").unwrap();
        let g = build_group(&spec, &Tolerance::default(), DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(g.seed_dim(), 4);
        let v: Vec<Complex64> = [1.0, 1.0, -1.0, -1.0].iter().map(|x| Complex64::new(*x, 0.0)).collect();
        let w = g.seed_to_working(&v).unwrap();
        assert_eq!(w.len(), 3);
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 4.0).abs() < 1e-12);
        let bad: Vec<Complex64> = [1.0, 0.0, 0.0, 0.0].iter().map(|x| Complex64::new(*x, 0.0)).collect();
        assert!(g.seed_to_working(&bad).is_err());
    }

    fn conjugated_dihedral(entries: [f64; 4]) -> Option<FiniteMatrixGroup> {
        let m = DMatrix::from_row_slice(2, 2, &entries.map(|x| Complex64::new(x, 0.0)));
        let det = m.determinant().norm();
        if det < 0.3 {
            return None;
        }
        let minv = m.clone().try_inverse()?;
        let spec = GroupSpec::parse("dihedral(3)").unwrap();
        let base = build_generators(&spec).unwrap();
        let matrices: Vec<Vec<Complex64>> = base
            .matrices
            .iter()
            .map(|g| {
                let c = &minv * g * &m;
                (0..4).map(|k| c[(k / 2, k % 2)]).collect()
            })
            .collect();
        let spec = GroupSpec::explicit(Field::Real, matrices).ok()?;
        build_group(&spec, &Tolerance::default(), DEFAULT_MAX_ORDER).ok()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn unitarize_conjugated_copies(a in 0.5f64..2.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in 0.5f64..2.0) {
            if let Some(g) = conjugated_dihedral([a, b, c, d]) {
                prop_assert_eq!(g.order(), 6);
                prop_assert!(g.unitarity_deviation() <= 1e-9);
            }
        }
    }
}
