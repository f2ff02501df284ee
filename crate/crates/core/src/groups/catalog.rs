//! Named groups with their known orders and seed vectors of known orbit size.

use num_complex::Complex64;

use crate::orbits::format_vector;

#[derive(Clone, Debug)]
pub struct CatalogSeed {
    pub name: String,
    pub literal: String,
    /// Number of lines in the orbit.
    pub lines: usize,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub spec: String,
    pub order: usize,
    pub seeds: Vec<CatalogSeed>,
}

fn seed(name: impl Into<String>, literal: impl Into<String>, lines: usize) -> CatalogSeed {
    CatalogSeed { name: name.into(), literal: literal.into(), lines }
}

/// Seed for the Bloch direction `n`: the line spanned by `(1 + n_z, n_x + i n_y)`.
pub fn bloch_seed(n: [f64; 3]) -> String {
    let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let [x, y, z] = n.map(|c| c / r);
    let v = if 1.0 + z < 1e-12 {
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    } else {
        vec![Complex64::new(1.0 + z, 0.0), Complex64::new(x, y)]
    };
    format_vector(&v)
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn ones(d: usize, k: usize) -> String {
    (0..d).map(|i| if i < k { "1" } else { "0" }).collect::<Vec<_>>().join(",")
}

fn hyperoctahedral(d: usize, even: bool) -> CatalogEntry {
    let seeds = (1..=d)
        .map(|k| {
            let mut lines = binom(d, k) << (k - 1);
            if even && k == d {
                lines = if d.is_multiple_of(2) { 1 << (d - 2) } else { 1 << (d - 1) };
            }
            seed(format!("k{k}"), ones(d, k), lines)
        })
        .collect();
    let order = (1usize << d) * factorial(d) / if even { 2 } else { 1 };
    let name = if even { format!("G(2,2,{d})") } else { format!("G(2,1,{d})") };
    CatalogEntry { spec: name, order, seeds }
}

const GENERIC2: &str = "0.8,0.3+0.5i";
const GENERIC2_REAL: &str = "0.8,0.3";

pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    for d in 2..=5 {
        out.push(hyperoctahedral(d, false));
    }
    for d in 3..=5 {
        let mut e = hyperoctahedral(d, true);
        if d == 4 {
            e.seeds.push(seed("k4-odd", "1,1,1,-1", 4));
        }
        out.push(e);
    }
    out.push(CatalogEntry {
        spec: "A(3)".into(),
        order: 24,
        seeds: vec![
            seed("halves", "1,1,-1,-1", 3),
            seed("vertex", "3,-1,-1,-1", 4),
            seed("edge", "1,-1,0,0", 6),
        ],
    });
    out.push(CatalogEntry {
        spec: "A(4)".into(),
        order: 120,
        seeds: vec![seed("vertex", "4,-1,-1,-1,-1", 5), seed("edge-mid", "3,3,-2,-2,-2", 10)],
    });
    out.push(CatalogEntry {
        spec: "A(5)".into(),
        order: 720,
        seeds: vec![
            seed("vertex", "5,-1,-1,-1,-1,-1", 6),
            seed("halves", "1,1,1,-1,-1,-1", 10),
            seed("edge-mid", "2,2,-1,-1,-1,-1", 15),
        ],
    });
    out.push(CatalogEntry {
        spec: "binT".into(),
        order: 24,
        seeds: vec![
            seed("e1", "1,0", 6),
            seed("vertex", bloch_seed([1.0, 1.0, 1.0]), 4),
            seed("antivertex", bloch_seed([-1.0, -1.0, -1.0]), 4),
            seed("generic", GENERIC2, 12),
        ],
    });
    out.push(CatalogEntry {
        spec: "binO".into(),
        order: 48,
        seeds: vec![
            seed("e1", "1,0", 6),
            seed("vertex", bloch_seed([1.0, 1.0, 1.0]), 8),
            seed("edge", bloch_seed([1.0, 1.0, 0.0]), 12),
            seed("generic", GENERIC2, 24),
        ],
    });
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    out.push(CatalogEntry {
        spec: "binI".into(),
        order: 120,
        seeds: vec![
            seed("e1", "1,0", 30),
            seed("face", bloch_seed([1.0, 1.0, 1.0]), 20),
            seed("vertex", bloch_seed([0.0, 0.5, 0.5 / phi]), 12),
            seed("generic", GENERIC2, 60),
        ],
    });
    for n in [4usize, 6, 8, 10] {
        out.push(CatalogEntry {
            spec: format!("binD({n})"),
            order: 2 * n,
            seeds: vec![seed("e1", "1,0", 2), seed("generic", GENERIC2, n)],
        });
    }
    out.push(CatalogEntry {
        spec: "H3".into(),
        order: 120,
        seeds: vec![
            seed("vertex", "sqrt5:0,1,1/2+1/2*s5", 6),
            seed("face", "1,1,1", 10),
            seed("edge", "1,0,0", 15),
        ],
    });
    out.push(CatalogEntry {
        spec: "H4".into(),
        order: 14400,
        seeds: vec![seed("e1", "1,0,0,0", 60), seed("e12", "1,1,0,0", 300)],
    });
    for d in [2usize, 3, 4] {
        let generic = ["0.7", "0.3+0.5i", "-0.2+0.1i", "0.4-0.3i"][..d].join(",");
        let generic = if d == 2 { GENERIC2_REAL.to_string() } else { generic };
        out.push(CatalogEntry {
            spec: format!("heis({d})"),
            order: d * d * d,
            seeds: vec![seed("e1", ones(d, 1), d), seed("generic", generic, d * d)],
        });
    }
    for m in [3usize, 4, 5, 6] {
        out.push(CatalogEntry {
            spec: format!("G({m},{m},2)"),
            order: 2 * m,
            seeds: vec![
                seed("e1", "1,0", 2),
                seed("generic", GENERIC2, if m % 2 == 1 { 2 * m } else { m }),
            ],
        });
    }
    for m in [3usize, 4, 5, 6] {
        out.push(CatalogEntry {
            spec: format!("dihedral({m})"),
            order: 2 * m,
            seeds: vec![seed("generic", GENERIC2_REAL, if m % 2 == 1 { 2 * m } else { m })],
        });
        out.push(CatalogEntry {
            spec: format!("rot({m})"),
            order: m,
            seeds: vec![seed("generic", GENERIC2_REAL, if m % 2 == 1 { m } else { m / 2 })],
        });
    }
    out
}

/// Catalog entry by spec string, ignoring case and whitespace.
pub fn lookup(spec: &str) -> Option<CatalogEntry> {
    let norm = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let key = norm(spec);
    catalog().into_iter().find(|e| norm(&e.spec) == key)
}
