//! Group identifiers and the spec-string grammar.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use super::Field;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum GroupKind {
    /// Monomial group G(m,p,n) acting on C^n.
    Imprimitive { m: u32, p: u32, n: u32 },
    /// A_d = G(1,1,d+1) acting on the sum-zero hyperplane of R^(d+1).
    Symmetric { d: u32 },
    /// Dihedral group of order 2m on R^2.
    Dihedral { m: u32 },
    /// Rotation group of order m on R^2.
    Rotation { m: u32 },
    /// Binary dihedral group of order 2n in SU(2).
    BinaryDihedral { n: u32 },
    BinaryTetrahedral,
    BinaryOctahedral,
    BinaryIcosahedral,
    H3,
    H4,
    /// Heisenberg group generated by the cyclic shift and modulation on C^d.
    Heisenberg { d: u32 },
    Explicit(ExplicitGenerators),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitGenerators {
    pub field: Field,
    pub dim: usize,
    /// Row-major generator matrices.
    pub matrices: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub label: String,
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl GroupSpec {
    pub fn new(kind: GroupKind) -> Result<Self> {
        validate(&kind)?;
        let label = default_label(&kind);
        Ok(GroupSpec { kind, label })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn imprimitive(m: u32, p: u32, n: u32) -> Result<Self> {
        if m == 1 && p == 1 && n >= 2 {
            let spec = GroupSpec::new(GroupKind::Symmetric { d: n - 1 })?;
            return Ok(spec.with_label(format!("G(1,1,{n})")));
        }
        GroupSpec::new(GroupKind::Imprimitive { m, p, n })
    }

    pub fn explicit(field: Field, matrices: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = explicit_dim(&matrices)?;
        GroupSpec::new(GroupKind::Explicit(ExplicitGenerators { field, dim, matrices }))
    }

    /// Parses the spec grammar: `G(m,p,n)`, `A(d)`, `B(d)`, `D(d)`, `dihedral(m)`,
    /// `rot(m)`, `binT`, `binO`, `binI`, `binD(2m)`, `H3`, `H4`, `heis(d)`,
    /// `explicit:<path>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("explicit:") {
            let spec = load_explicit(Path::new(path.trim()))?;
            return Ok(spec.with_label(s.to_string()));
        }
        let (name, args) = split_call(s)?;
        let kind_label = |spec: Result<GroupSpec>| spec.map(|g| g.with_label(normalize(s)));
        match (name.to_ascii_lowercase().as_str(), args.as_slice()) {
            ("g", [m, p, n]) => kind_label(GroupSpec::imprimitive(*m, *p, *n)),
            ("a", [d]) => kind_label(GroupSpec::new(GroupKind::Symmetric { d: *d })),
            ("b", [d]) => {
                if *d < 2 {
                    return Err(Error::InvalidGroup(format!("B({d}) needs d >= 2")));
                }
                kind_label(GroupSpec::new(GroupKind::Imprimitive { m: 2, p: 1, n: *d }))
            }
            ("d", [d]) => {
                if *d < 3 {
                    return Err(Error::InvalidGroup(format!("D({d}) needs d >= 3")));
                }
                kind_label(GroupSpec::new(GroupKind::Imprimitive { m: 2, p: 2, n: *d }))
            }
            ("dihedral", [m]) => kind_label(GroupSpec::new(GroupKind::Dihedral { m: *m })),
            ("rot", [m]) => kind_label(GroupSpec::new(GroupKind::Rotation { m: *m })),
            ("bind", [n]) => kind_label(GroupSpec::new(GroupKind::BinaryDihedral { n: *n })),
            ("bint", []) => kind_label(GroupSpec::new(GroupKind::BinaryTetrahedral)),
            ("bino", []) => kind_label(GroupSpec::new(GroupKind::BinaryOctahedral)),
            ("bini", []) => kind_label(GroupSpec::new(GroupKind::BinaryIcosahedral)),
            ("h3", []) => kind_label(GroupSpec::new(GroupKind::H3)),
            ("h4", []) => kind_label(GroupSpec::new(GroupKind::H4)),
            ("heis", [d]) => kind_label(GroupSpec::new(GroupKind::Heisenberg { d: *d })),
            _ => Err(Error::Parse(format!("unrecognized group spec `{s}`"))),
        }
    }

    pub fn field(&self) -> Field {
        match &self.kind {
            GroupKind::Imprimitive { m, .. } => {
                if *m <= 2 {
                    Field::Real
                } else {
                    Field::Complex
                }
            }
            GroupKind::Symmetric { .. }
            | GroupKind::Dihedral { .. }
            | GroupKind::Rotation { .. }
            | GroupKind::H3
            | GroupKind::H4 => Field::Real,
            GroupKind::Heisenberg { d } => {
                if *d == 2 {
                    Field::Real
                } else {
                    Field::Complex
                }
            }
            GroupKind::BinaryDihedral { .. }
            | GroupKind::BinaryTetrahedral
            | GroupKind::BinaryOctahedral
            | GroupKind::BinaryIcosahedral => Field::Complex,
            GroupKind::Explicit(e) => e.field,
        }
    }

    /// Dimension of the space the group acts on.
    pub fn dim(&self) -> usize {
        match &self.kind {
            GroupKind::Imprimitive { n, .. } => *n as usize,
            GroupKind::Symmetric { d } => *d as usize,
            GroupKind::Dihedral { .. }
            | GroupKind::Rotation { .. }
            | GroupKind::BinaryDihedral { .. }
            | GroupKind::BinaryTetrahedral
            | GroupKind::BinaryOctahedral
            | GroupKind::BinaryIcosahedral => 2,
            GroupKind::H3 => 3,
            GroupKind::H4 => 4,
            GroupKind::Heisenberg { d } => *d as usize,
            GroupKind::Explicit(e) => e.dim,
        }
    }
}

fn validate(kind: &GroupKind) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidGroup(msg));
    match kind {
        GroupKind::Imprimitive { m, p, n } => {
            if *m == 0 || *p == 0 || m % p != 0 {
                return bad(format!("G({m},{p},{n}) requires p | m"));
            }
            if *n < 2 {
                return bad(format!("G({m},{p},{n}) requires n >= 2"));
            }
            if (*m, *p, *n) == (2, 2, 2) {
                return bad("G(2,2,2) is not irreducible".into());
            }
            if *m == 1 {
                return bad("G(1,1,n) is realized as A(n-1)".into());
            }
        }
        GroupKind::Symmetric { d } if *d < 1 => return bad("A(d) requires d >= 1".into()),
        GroupKind::Dihedral { m } if *m < 3 => return bad("dihedral(m) requires m >= 3".into()),
        GroupKind::Rotation { m } if *m < 3 => return bad("rot(m) requires m >= 3".into()),
        GroupKind::BinaryDihedral { n } if *n < 4 || n % 2 != 0 => {
            return bad("binD(n) requires an even n >= 4".into());
        }
        GroupKind::Heisenberg { d } if *d < 2 => return bad("heis(d) requires d >= 2".into()),
        GroupKind::Explicit(e) => {
            if e.matrices.is_empty() {
                return bad("explicit group needs at least one generator".into());
            }
            explicit_dim(&e.matrices)?;
        }
        _ => {}
    }
    Ok(())
}

fn default_label(kind: &GroupKind) -> String {
    match kind {
        GroupKind::Imprimitive { m, p, n } => format!("G({m},{p},{n})"),
        GroupKind::Symmetric { d } => format!("A({d})"),
        GroupKind::Dihedral { m } => format!("dihedral({m})"),
        GroupKind::Rotation { m } => format!("rot({m})"),
        GroupKind::BinaryDihedral { n } => format!("binD({n})"),
        GroupKind::BinaryTetrahedral => "binT".into(),
        GroupKind::BinaryOctahedral => "binO".into(),
        GroupKind::BinaryIcosahedral => "binI".into(),
        GroupKind::H3 => "H3".into(),
        GroupKind::H4 => "H4".into(),
        GroupKind::Heisenberg { d } => format!("heis({d})"),
        GroupKind::Explicit(_) => "explicit".into(),
    }
}

fn normalize(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn split_call(s: &str) -> Result<(String, Vec<u32>)> {
    let s = normalize(s);
    let Some(open) = s.find('(') else {
        return Ok((s, Vec::new()));
    };
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("missing `)` in group spec `{s}`")));
    }
    let name = s[..open].to_string();
    let inner = &s[open + 1..s.len() - 1];
    let args = inner
        .split(',')
        .map(|a| {
            a.parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad integer `{a}` in group spec `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((name, args))
}

fn explicit_dim(matrices: &[Vec<Complex64>]) -> Result<usize> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidGroup("explicit group needs at least one generator".into()))?;
    let dim = (first.len() as f64).sqrt().round() as usize;
    if dim == 0 || dim * dim != first.len() {
        return Err(Error::InvalidGroup(format!(
            "generator with {} entries is not square",
            first.len()
        )));
    }
    for m in matrices {
        if m.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: m.len() });
        }
    }
    Ok(dim)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonEntry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize)]
struct ExplicitFile {
    field: String,
    generators: Vec<Vec<JsonEntry>>,
}

/// Reads an explicit generator file: `{"field": "R"|"C", "generators": [[[re,im],...],...]}`.
pub fn load_explicit(path: &Path) -> Result<GroupSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_explicit_json(&text)
}

pub fn parse_explicit_json(text: &str) -> Result<GroupSpec> {
    let file: ExplicitFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("explicit group file: {e}")))?;
    let field = Field::parse(&file.field)?;
    let matrices = file
        .generators
        .into_iter()
        .map(|g| {
            g.into_iter()
                .map(|e| match e {
                    JsonEntry::Real(x) => Complex64::new(x, 0.0),
                    JsonEntry::Complex([re, im]) => Complex64::new(re, im),
                })
                .collect()
        })
        .collect();
    GroupSpec::explicit(field, matrices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        let g = GroupSpec::parse("G(2,1,4)").unwrap();
        assert_eq!(g.kind, GroupKind::Imprimitive { m: 2, p: 1, n: 4 });
        assert_eq!(g.label, "G(2,1,4)");
        assert_eq!(g.field(), Field::Real);

        let b = GroupSpec::parse("B(3)").unwrap();
        assert_eq!(b.kind, GroupKind::Imprimitive { m: 2, p: 1, n: 3 });
        let d = GroupSpec::parse(" D(4) ").unwrap();
        assert_eq!(d.kind, GroupKind::Imprimitive { m: 2, p: 2, n: 4 });

        let a = GroupSpec::parse("G(1,1,5)").unwrap();
        assert_eq!(a.kind, GroupKind::Symmetric { d: 4 });
        assert_eq!(a.dim(), 4);

        assert_eq!(GroupSpec::parse("binI").unwrap().kind, GroupKind::BinaryIcosahedral);
        assert_eq!(GroupSpec::parse("binD(8)").unwrap().kind, GroupKind::BinaryDihedral { n: 8 });
        assert_eq!(GroupSpec::parse("heis(3)").unwrap().field(), Field::Complex);
        assert_eq!(GroupSpec::parse("heis(2)").unwrap().field(), Field::Real);
        assert_eq!(GroupSpec::parse("G(3,1,2)").unwrap().field(), Field::Complex);
    }

    #[test]
    fn rejects_invalid() {
        assert!(GroupSpec::parse("G(3,3,1)").is_err());
        assert!(GroupSpec::parse("G(4,3,2)").is_err());
        assert!(GroupSpec::parse("G(2,2,2)").is_err());
        assert!(GroupSpec::parse("dihedral(2)").is_err());
        assert!(GroupSpec::parse("binD(5)").is_err());
        assert!(GroupSpec::parse("foo").is_err());
        assert!(GroupSpec::parse("G(2,x,3)").is_err());
        assert!(GroupSpec::parse("G(2,1,3").is_err());
    }

    #[test]
    fn explicit_json() {
        let text = r#"{"field": "R", "generators": [[0, -1, 1, 0], [[1,0],[0,0],[0,0],[-1,0]]]}"#;
        let g = parse_explicit_json(text).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.field(), Field::Real);
        let GroupKind::Explicit(e) = &g.kind else { panic!() };
        assert_eq!(e.matrices.len(), 2);
        assert_eq!(e.matrices[0][1], Complex64::new(-1.0, 0.0));

        let bad = r#"{"field": "C", "generators": [[1, 0, 0]]}"#;
        assert!(parse_explicit_json(bad).is_err());
    }
}
